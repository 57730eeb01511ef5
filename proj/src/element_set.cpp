#include "cflab/element_set.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace cflab {

namespace {

bool run_order(const FiniteSet::Run& a, const FiniteSet::Run& b) {
  if (a.prefix != b.prefix) return a.prefix < b.prefix;
  return a.lo < b.lo;
}

std::int64_t dsum_add(const GroupDescriptor& d, std::int64_t a,
                      std::int64_t b) {
  std::int64_t out = 0;
  for (int i = 0; i < d.window(); ++i) {
    if (a == 0 && b == 0) break;
    const std::int64_t m = d.order_at(i);
    out += ((a % m + b % m) % m) * d.place(i);
    a /= m;
    b /= m;
  }
  return out;
}

std::int64_t dsum_neg(const GroupDescriptor& d, std::int64_t a) {
  std::int64_t out = 0;
  for (int i = 0; i < d.window(); ++i) {
    if (a == 0) break;
    const std::int64_t m = d.order_at(i);
    out += ((m - a % m) % m) * d.place(i);
    a /= m;
  }
  return out;
}

/// Aligned mixed-radix block: [base, base + place(level) - 1] with
/// base % place(level) == 0, i.e. the low `level` digits range freely.
struct DsumBlock {
  std::int64_t base;
  int level;
};

void dsum_decompose(const GroupDescriptor& d, std::int64_t lo, std::int64_t hi,
                    std::vector<DsumBlock>& out) {
  const int w = d.window();
  std::int64_t cur = lo;
  while (cur <= hi) {
    int best = 0;
    while (best < w && cur % d.place(best + 1) == 0 &&
           cur + d.place(best + 1) - 1 <= hi)
      ++best;
    out.push_back({cur, best});
    cur += d.place(best);
  }
}

}  // namespace

void FiniteSet::normalize() {
  std::sort(runs_.begin(), runs_.end(), run_order);
  std::vector<Run> merged;
  merged.reserve(runs_.size());
  for (const Run& r : runs_) {
    if (r.lo > r.hi) throw std::invalid_argument("FiniteSet: run with lo > hi");
    if (!merged.empty() && merged.back().prefix == r.prefix &&
        r.lo <= merged.back().hi + 1) {
      merged.back().hi = std::max(merged.back().hi, r.hi);
    } else {
      merged.push_back(r);
    }
  }
  runs_ = std::move(merged);
  runs_.shrink_to_fit();
  card_ = 0;
  for (const Run& r : runs_) card_ += r.hi - r.lo + 1;
}

FiniteSet FiniteSet::empty_set(const GroupDescriptor& d) {
  return FiniteSet(d.arity());
}

FiniteSet FiniteSet::single(const GroupDescriptor& d, const GroupElement& g) {
  require_same_kind(d, g, "FiniteSet::single");
  FiniteSet s(d.arity());
  Run r;
  for (int i = 0; i + 1 < d.arity(); ++i) r.prefix[std::size_t(i)] = g.coords[std::size_t(i)];
  r.lo = r.hi = g.coords.back();
  s.runs_ = {r};
  s.card_ = 1;
  return s;
}

FiniteSet FiniteSet::from_elements(const GroupDescriptor& d,
                                   std::span<const GroupElement> elems) {
  FiniteSet s(d.arity());
  s.runs_.reserve(elems.size());
  for (const GroupElement& g : elems) {
    require_same_kind(d, g, "FiniteSet::from_elements");
    Run r;
    for (int i = 0; i + 1 < d.arity(); ++i) r.prefix[std::size_t(i)] = g.coords[std::size_t(i)];
    r.lo = r.hi = g.coords.back();
    s.runs_.push_back(r);
  }
  s.normalize();
  return s;
}

FiniteSet FiniteSet::from_elements(const GroupDescriptor& d,
                                   const std::vector<GroupElement>& elems) {
  return from_elements(d, std::span<const GroupElement>(elems));
}

FiniteSet FiniteSet::from_runs(int arity, std::vector<Run> runs) {
  FiniteSet s(arity);
  s.runs_ = std::move(runs);
  s.normalize();
  return s;
}

bool FiniteSet::contains(const GroupElement& g) const {
  if (static_cast<int>(g.coords.size()) != arity_) return false;
  Run probe;
  for (int i = 0; i + 1 < arity_; ++i) probe.prefix[std::size_t(i)] = g.coords[std::size_t(i)];
  probe.lo = probe.hi = g.coords.back();
  auto it = std::upper_bound(runs_.begin(), runs_.end(), probe, run_order);
  if (it == runs_.begin()) return false;
  --it;
  return it->prefix == probe.prefix && it->lo <= probe.lo && probe.lo <= it->hi;
}

GroupElement FiniteSet::element_at(const GroupDescriptor& d,
                                   std::int64_t idx) const {
  if (idx < 0 || idx >= card_)
    throw std::out_of_range("FiniteSet::element_at: index out of range");
  for (const Run& r : runs_) {
    const std::int64_t len = r.hi - r.lo + 1;
    if (idx < len) {
      std::vector<std::int64_t> coords;
      for (int i = 0; i + 1 < arity_; ++i) coords.push_back(r.prefix[std::size_t(i)]);
      coords.push_back(r.lo + idx);
      return GroupElement{d.kind(), std::move(coords)};
    }
    idx -= len;
  }
  throw std::logic_error("FiniteSet::element_at: corrupt cardinality");
}

std::vector<GroupElement> FiniteSet::elements(const GroupDescriptor& d,
                                              std::int64_t cap) const {
  if (card_ > cap)
    throw std::length_error("FiniteSet::elements: set too large (" +
                            std::to_string(card_) + " elements)");
  std::vector<GroupElement> out;
  out.reserve(std::size_t(card_));
  for (const Run& r : runs_)
    for (std::int64_t v = r.lo; v <= r.hi; ++v) {
      std::vector<std::int64_t> coords;
      for (int i = 0; i + 1 < arity_; ++i) coords.push_back(r.prefix[std::size_t(i)]);
      coords.push_back(v);
      out.push_back(GroupElement{d.kind(), std::move(coords)});
    }
  return out;
}

bool FiniteSet::is_subset_of(const FiniteSet& other) const {
  if (arity_ != other.arity_) return false;
  // After normalization runs with equal prefix are disjoint and
  // non-adjacent, so a contiguous run is covered iff one run covers it.
  for (const Run& r : runs_) {
    auto it = std::upper_bound(other.runs_.begin(), other.runs_.end(), r,
                               run_order);
    if (it == other.runs_.begin()) return false;
    --it;
    if (it->prefix != r.prefix || it->lo > r.lo || r.hi > it->hi) return false;
  }
  return true;
}

bool FiniteSet::intersects(const FiniteSet& other) const {
  if (arity_ != other.arity_) return false;
  std::size_t i = 0, j = 0;
  while (i < runs_.size() && j < other.runs_.size()) {
    const Run& a = runs_[i];
    const Run& b = other.runs_[j];
    if (a.prefix != b.prefix) {
      if (a.prefix < b.prefix)
        ++i;
      else
        ++j;
      continue;
    }
    if (a.hi < b.lo)
      ++i;
    else if (b.hi < a.lo)
      ++j;
    else
      return true;
  }
  return false;
}

FiniteSet set_union(const FiniteSet& a, const FiniteSet& b) {
  if (a.arity_ != b.arity_)
    throw KindMismatchError("set_union: incompatible sets");
  std::vector<FiniteSet::Run> merged;
  merged.reserve(a.runs_.size() + b.runs_.size());
  std::merge(a.runs_.begin(), a.runs_.end(), b.runs_.begin(), b.runs_.end(),
             std::back_inserter(merged), run_order);
  FiniteSet out(a.arity_);
  out.runs_ = std::move(merged);
  out.normalize();
  return out;
}

FiniteSet set_intersect(const FiniteSet& a, const FiniteSet& b) {
  if (a.arity_ != b.arity_)
    throw KindMismatchError("set_intersect: incompatible sets");
  FiniteSet out(a.arity_);
  std::size_t i = 0, j = 0;
  while (i < a.runs_.size() && j < b.runs_.size()) {
    const auto& x = a.runs_[i];
    const auto& y = b.runs_[j];
    if (x.prefix != y.prefix) {
      if (x.prefix < y.prefix)
        ++i;
      else
        ++j;
      continue;
    }
    const std::int64_t lo = std::max(x.lo, y.lo);
    const std::int64_t hi = std::min(x.hi, y.hi);
    if (lo <= hi) out.runs_.push_back({x.prefix, lo, hi});
    if (x.hi < y.hi)
      ++i;
    else
      ++j;
  }
  out.normalize();
  return out;
}

FiniteSet set_subtract(const FiniteSet& a, const FiniteSet& b) {
  if (a.arity_ != b.arity_)
    throw KindMismatchError("set_subtract: incompatible sets");
  FiniteSet out(a.arity_);
  std::size_t j = 0;
  for (const auto& x : a.runs_) {
    std::int64_t cur = x.lo;
    // advance j to the first b-run that could overlap x
    while (j < b.runs_.size() &&
           (b.runs_[j].prefix < x.prefix ||
            (b.runs_[j].prefix == x.prefix && b.runs_[j].hi < x.lo)))
      ++j;
    std::size_t k = j;
    while (k < b.runs_.size() && b.runs_[k].prefix == x.prefix &&
           b.runs_[k].lo <= x.hi) {
      if (cur < b.runs_[k].lo)
        out.runs_.push_back({x.prefix, cur, b.runs_[k].lo - 1});
      cur = std::max(cur, b.runs_[k].hi + 1);
      ++k;
    }
    if (cur <= x.hi) out.runs_.push_back({x.prefix, cur, x.hi});
  }
  out.normalize();
  return out;
}

/// Collects product-run emissions and normalizes in bounded-memory chunks so
/// that large products (tens of millions of candidate runs) never hold the
/// raw emission list in full.
class SetProductAccumulator {
 public:
  explicit SetProductAccumulator(int arity) : result_(arity) {}

  void emit(FiniteSet::Run r) {
    buffer_.push_back(r);
    if (buffer_.size() >= kChunk) flush();
  }

  FiniteSet take() {
    flush();
    return std::move(result_);
  }

 private:
  static constexpr std::size_t kChunk = std::size_t(1) << 22;

  void flush() {
    if (buffer_.empty()) return;
    FiniteSet chunk = FiniteSet::from_runs(result_.arity(), std::move(buffer_));
    buffer_ = {};
    result_ = result_.empty() ? std::move(chunk) : set_union(result_, chunk);
  }

  FiniteSet result_;
  std::vector<FiniteSet::Run> buffer_;
};

/// Accumulator for products whose emissions concentrate on a moderate grid of
/// prefix lanes.  Each lane keeps one eagerly-merged interval; arrivals that
/// would leave a gap spill into a side list that is sorted and merged once at
/// the end.  This replaces the sort-heavy chunked path with O(1) work per
/// run pair for box-like operands.
class LaneProductAccumulator {
 public:
  LaneProductAccumulator(std::int64_t x0, std::int64_t y0, std::int64_t w,
                         std::int64_t h)
      : x0_(x0), y0_(y0), w_(w), h_(h) {
    prim_.assign(std::size_t(w * h), {1, 0});  // lo > hi marks an empty lane
  }

  void insert(std::int64_t px, std::int64_t py, std::int64_t lo,
              std::int64_t hi) {
    auto& p = prim_[std::size_t((px - x0_) * h_ + (py - y0_))];
    if (p.first > p.second) {
      p = {lo, hi};
    } else if (lo <= p.second + 1 && p.first <= hi + 1) {
      p.first = std::min(p.first, lo);
      p.second = std::max(p.second, hi);
    } else {
      spill_[std::size_t((px - x0_) * h_ + (py - y0_))].push_back({lo, hi});
    }
  }

  FiniteSet take(int arity) {
    std::vector<FiniteSet::Run> runs;
    std::vector<std::pair<std::int64_t, std::int64_t>> scratch;
    for (std::int64_t ix = 0; ix < w_; ++ix)
      for (std::int64_t iy = 0; iy < h_; ++iy) {
        const std::size_t idx = std::size_t(ix * h_ + iy);
        const auto& p = prim_[idx];
        FiniteSet::Run base;
        base.prefix = {x0_ + ix, y0_ + iy};
        if (arity < 3) base.prefix[1] = 0;
        if (arity < 2) base.prefix[0] = 0;
        auto it = spill_.find(idx);
        if (it == spill_.end()) {
          if (p.first > p.second) continue;
          base.lo = p.first;
          base.hi = p.second;
          runs.push_back(base);
          continue;
        }
        scratch = it->second;
        if (p.first <= p.second) scratch.push_back(p);
        std::sort(scratch.begin(), scratch.end());
        for (const auto& iv : scratch) {
          if (!runs.empty() && runs.back().prefix == base.prefix &&
              iv.first <= runs.back().hi + 1) {
            runs.back().hi = std::max(runs.back().hi, iv.second);
          } else {
            base.lo = iv.first;
            base.hi = iv.second;
            runs.push_back(base);
          }
        }
      }
    return FiniteSet::from_runs(arity, std::move(runs));
  }

 private:
  std::int64_t x0_, y0_, w_, h_;
  std::vector<std::pair<std::int64_t, std::int64_t>> prim_;
  std::map<std::size_t, std::vector<std::pair<std::int64_t, std::int64_t>>>
      spill_;
};

/// Decides whether the lane accumulator pays off: enough emissions to matter,
/// a materializable lane grid, and enough lanes that per-lane spill lists
/// stay short.
bool use_lane_path(std::int64_t pairs, std::int64_t lanes) {
  return pairs > (std::int64_t(1) << 20) && lanes >= 256 &&
         lanes <= (std::int64_t(1) << 23) && pairs / lanes <= 4096;
}

FiniteSet set_product(const GroupDescriptor& d, const FiniteSet& a,
                      const FiniteSet& b) {
  if (a.arity() != d.arity() || b.arity() != d.arity())
    throw KindMismatchError("set_product: sets do not match the group");
  if (d.kind() == GroupKind::DirectSumCyclic) {
    // Digitwise addition maps aligned blocks to aligned blocks: the block
    // with more free digits absorbs the other's low fixed digits.
    SetProductAccumulator acc(d.arity());
    std::vector<DsumBlock> ba, bb;
    for (const auto& x : a.runs()) dsum_decompose(d, x.lo, x.hi, ba);
    for (const auto& y : b.runs()) dsum_decompose(d, y.lo, y.hi, bb);
    for (const auto& x : ba)
      for (const auto& y : bb) {
        const int level = std::max(x.level, y.level);
        const std::int64_t p = d.place(level);
        const std::int64_t base = dsum_add(d, x.base / p * p, y.base / p * p);
        acc.emit({{0, 0}, base, base + p - 1});
      }
    return acc.take();
  }

  // Lattice and Heisenberg products emit one run per run pair; the c-part of
  // a Heisenberg product (a,b,c)*(a',b',c') twists by the constant a*b'.
  const bool heis = d.kind() == GroupKind::DiscreteHeisenberg;
  auto emit_pairs = [&](auto&& sink) {
    for (const auto& x : a.runs())
      for (const auto& y : b.runs()) {
        const std::int64_t twist = heis ? x.prefix[0] * y.prefix[1] : 0;
        sink(x.prefix[0] + y.prefix[0], x.prefix[1] + y.prefix[1],
             x.lo + y.lo + twist, x.hi + y.hi + twist);
      }
  };

  const std::int64_t pairs =
      std::int64_t(a.runs().size()) * std::int64_t(b.runs().size());
  std::int64_t lx0 = 0, lx1 = 0, ly0 = 0, ly1 = 0;
  if (!a.empty() && !b.empty()) {
    auto scan = [](const FiniteSet& s, std::int64_t& xmin, std::int64_t& xmax,
                   std::int64_t& ymin, std::int64_t& ymax) {
      xmin = ymin = std::numeric_limits<std::int64_t>::max();
      xmax = ymax = std::numeric_limits<std::int64_t>::min();
      for (const auto& r : s.runs()) {
        xmin = std::min(xmin, r.prefix[0]);
        xmax = std::max(xmax, r.prefix[0]);
        ymin = std::min(ymin, r.prefix[1]);
        ymax = std::max(ymax, r.prefix[1]);
      }
    };
    std::int64_t ax0, ax1, ay0, ay1, bx0, bx1, by0, by1;
    scan(a, ax0, ax1, ay0, ay1);
    scan(b, bx0, bx1, by0, by1);
    lx0 = ax0 + bx0;
    lx1 = ax1 + bx1;
    ly0 = ay0 + by0;
    ly1 = ay1 + by1;
  }
  const std::int64_t lw = lx1 - lx0 + 1, lh = ly1 - ly0 + 1;
  const std::int64_t lanes =
      (lw <= (std::int64_t(1) << 23) && lh <= (std::int64_t(1) << 23))
          ? lw * lh
          : std::numeric_limits<std::int64_t>::max();
  if (!a.empty() && !b.empty() && use_lane_path(pairs, lanes)) {
    LaneProductAccumulator acc(lx0, ly0, lw, lh);
    emit_pairs([&](std::int64_t px, std::int64_t py, std::int64_t lo,
                   std::int64_t hi) { acc.insert(px, py, lo, hi); });
    return acc.take(d.arity());
  }
  SetProductAccumulator acc(d.arity());
  emit_pairs([&](std::int64_t px, std::int64_t py, std::int64_t lo,
                 std::int64_t hi) { acc.emit({{px, py}, lo, hi}); });
  return acc.take();
}

FiniteSet set_inverse(const GroupDescriptor& d, const FiniteSet& a) {
  if (a.arity() != d.arity())
    throw KindMismatchError("set_inverse: set does not match the group");
  std::vector<FiniteSet::Run> out;
  switch (d.kind()) {
    case GroupKind::IntegerLattice:
      out.reserve(a.runs().size());
      for (const auto& r : a.runs())
        out.push_back({{-r.prefix[0], -r.prefix[1]}, -r.hi, -r.lo});
      break;
    case GroupKind::DiscreteHeisenberg:
      // (a,b,c)^{-1} = (-a,-b,-c+ab); a*b is constant per run.
      out.reserve(a.runs().size());
      for (const auto& r : a.runs()) {
        const std::int64_t ab = r.prefix[0] * r.prefix[1];
        out.push_back({{-r.prefix[0], -r.prefix[1]}, -r.hi + ab, -r.lo + ab});
      }
      break;
    case GroupKind::DirectSumCyclic: {
      std::vector<DsumBlock> blocks;
      for (const auto& r : a.runs()) dsum_decompose(d, r.lo, r.hi, blocks);
      for (const auto& blk : blocks) {
        const std::int64_t base = dsum_neg(d, blk.base);
        out.push_back({{0, 0}, base, base + d.place(blk.level) - 1});
      }
      break;
    }
  }
  return FiniteSet::from_runs(d.arity(), std::move(out));
}

FiniteSet left_translate(const GroupDescriptor& d, const GroupElement& g,
                         const FiniteSet& a) {
  return set_product(d, FiniteSet::single(d, g), a);
}

FiniteSet right_translate(const GroupDescriptor& d, const FiniteSet& a,
                          const GroupElement& g) {
  return set_product(d, a, FiniteSet::single(d, g));
}

namespace {

/// Image of one run under left translation, valid for the kinds where that
/// image is again a single run with the same relative order (lattice and
/// Heisenberg; for the latter the c-shift g_c + g_a*b is constant per run).
FiniteSet::Run translate_run(const GroupDescriptor& d, const GroupElement& g,
                             const FiniteSet::Run& r) {
  FiniteSet::Run out = r;
  if (d.kind() == GroupKind::DiscreteHeisenberg) {
    const std::int64_t shift = g.coords[2] + g.coords[0] * r.prefix[1];
    out.prefix[0] += g.coords[0];
    out.prefix[1] += g.coords[1];
    out.lo += shift;
    out.hi += shift;
    return out;
  }
  const int dim = d.lattice_dim();
  for (int i = 0; i + 1 < dim; ++i)
    out.prefix[std::size_t(i)] += g.coords[std::size_t(i)];
  out.lo += g.coords[std::size_t(dim - 1)];
  out.hi += g.coords[std::size_t(dim - 1)];
  return out;
}

bool order_preserving_translation(const GroupDescriptor& d) {
  return d.kind() == GroupKind::IntegerLattice ||
         d.kind() == GroupKind::DiscreteHeisenberg;
}

}  // namespace

bool translated_intersects(const GroupDescriptor& d, const GroupElement& g,
                           const FiniteSet& a, const FiniteSet& b) {
  require_same_kind(d, g, "translated_intersects");
  if (!order_preserving_translation(d))
    return left_translate(d, g, a).intersects(b);
  if (a.arity() != b.arity())
    throw KindMismatchError("translated_intersects: incompatible sets");
  const auto& ra = a.runs();
  const auto& rb = b.runs();
  std::size_t i = 0, j = 0;
  while (i < ra.size() && j < rb.size()) {
    const FiniteSet::Run x = translate_run(d, g, ra[i]);
    const FiniteSet::Run& y = rb[j];
    if (x.prefix != y.prefix) {
      if (x.prefix < y.prefix)
        ++i;
      else
        ++j;
      continue;
    }
    if (x.hi < y.lo)
      ++i;
    else if (y.hi < x.lo)
      ++j;
    else
      return true;
  }
  return false;
}

bool translated_subset(const GroupDescriptor& d, const GroupElement& g,
                       const FiniteSet& a, const FiniteSet& b) {
  require_same_kind(d, g, "translated_subset");
  if (!order_preserving_translation(d))
    return left_translate(d, g, a).is_subset_of(b);
  if (a.arity() != b.arity())
    throw KindMismatchError("translated_subset: incompatible sets");
  const auto& rb = b.runs();
  for (const auto& r : a.runs()) {
    const FiniteSet::Run x = translate_run(d, g, r);
    auto it = std::upper_bound(rb.begin(), rb.end(), x, run_order);
    if (it == rb.begin()) return false;
    --it;
    if (it->prefix != x.prefix || it->lo > x.lo || x.hi > it->hi) return false;
  }
  return true;
}

Rational folner_defect(const GroupDescriptor& d, const FiniteSet& f,
                       const FiniteSet& k) {
  if (f.empty())
    throw std::domain_error("folner_defect: F must be nonempty");
  Rational worst(0);
  for (std::int64_t i = 0; i < k.cardinality(); ++i) {
    const GroupElement g = k.element_at(d, i);
    const FiniteSet shifted = left_translate(d, g, f);
    const std::int64_t common = set_intersect(shifted, f).cardinality();
    const Rational defect =
        Rational(BigInt(2) * (f.cardinality() - common), BigInt(f.cardinality()));
    if (defect > worst) worst = defect;
  }
  return worst;
}

namespace {

void lattice_shell_rec(const GroupDescriptor& d, int coord, std::int64_t left,
                       std::vector<std::int64_t>& partial,
                       std::vector<GroupElement>& out) {
  const int dim = d.lattice_dim();
  if (coord == dim - 1) {
    if (left == 0) {
      partial.push_back(0);
      out.push_back(GroupElement{d.kind(), partial});
      partial.pop_back();
    } else {
      for (std::int64_t v : {-left, left}) {
        partial.push_back(v);
        out.push_back(GroupElement{d.kind(), partial});
        partial.pop_back();
      }
    }
    return;
  }
  for (std::int64_t v = -left; v <= left; ++v) {
    partial.push_back(v);
    lattice_shell_rec(d, coord + 1, left - (v < 0 ? -v : v), partial, out);
    partial.pop_back();
  }
}

void dsum_shell_rec(const GroupDescriptor& d, int digit, std::int64_t left,
                    std::int64_t code, std::vector<GroupElement>& out,
                    std::int64_t cap) {
  if (left == 0) {
    out.push_back(GroupElement{d.kind(), {code}});
    if (std::int64_t(out.size()) > cap)
      throw std::length_error("shell: too many elements");
    return;
  }
  if (digit >= d.window()) return;
  const std::int64_t m = d.order_at(digit);
  for (std::int64_t r = 0; r < m; ++r) {
    const std::int64_t w = std::min(r, m - r);
    if (w <= left)
      dsum_shell_rec(d, digit + 1, left - w, code + r * d.place(digit), out,
                     cap);
  }
}

std::vector<GroupElement> heis_ball_elements(const GroupDescriptor& d,
                                             std::int64_t r,
                                             std::vector<GroupElement>* last_shell) {
  std::set<GroupElement> seen{d.identity()};
  std::vector<GroupElement> frontier{d.identity()};
  if (last_shell) *last_shell = frontier;
  for (std::int64_t lvl = 1; lvl <= r; ++lvl) {
    std::vector<GroupElement> next;
    for (const auto& v : frontier)
      for (const auto& s : d.symmetric_generators()) {
        GroupElement w = mul(d, v, s);
        if (seen.insert(w).second) next.push_back(std::move(w));
      }
    if (std::int64_t(seen.size()) > (std::int64_t(1) << 23))
      throw std::length_error("heisenberg ball: radius too large");
    frontier = std::move(next);
    if (last_shell) *last_shell = frontier;
    if (frontier.empty()) break;
  }
  return {seen.begin(), seen.end()};
}

}  // namespace

FiniteSet shell(const GroupDescriptor& d, std::int64_t r) {
  if (r < 0) throw std::invalid_argument("shell: radius must be >= 0");
  if (r == 0) return FiniteSet::single(d, d.identity());
  switch (d.kind()) {
    case GroupKind::IntegerLattice: {
      std::vector<GroupElement> out;
      std::vector<std::int64_t> partial;
      lattice_shell_rec(d, 0, r, partial, out);
      return FiniteSet::from_elements(d, out);
    }
    case GroupKind::DirectSumCyclic: {
      std::vector<GroupElement> out;
      dsum_shell_rec(d, 0, r, 0, out, std::int64_t(1) << 22);
      return FiniteSet::from_elements(d, out);
    }
    case GroupKind::DiscreteHeisenberg: {
      std::vector<GroupElement> last;
      heis_ball_elements(d, r, &last);
      return FiniteSet::from_elements(d, last);
    }
  }
  throw std::logic_error("shell: unknown kind");
}

FiniteSet ball(const GroupDescriptor& d, std::int64_t r) {
  if (r < 0) throw std::invalid_argument("ball: radius must be >= 0");
  switch (d.kind()) {
    case GroupKind::IntegerLattice: {
      // l1 ball emitted directly as runs over the last coordinate.
      std::vector<FiniteSet::Run> runs;
      const int dim = d.lattice_dim();
      if (dim == 1) {
        runs.push_back({{0, 0}, -r, r});
      } else if (dim == 2) {
        for (std::int64_t x = -r; x <= r; ++x) {
          const std::int64_t rem = r - (x < 0 ? -x : x);
          runs.push_back({{x, 0}, -rem, rem});
        }
      } else {
        for (std::int64_t x = -r; x <= r; ++x)
          for (std::int64_t y = -(r - std::abs(x)); y <= r - std::abs(x); ++y) {
            const std::int64_t rem = r - std::abs(x) - std::abs(y);
            runs.push_back({{x, y}, -rem, rem});
          }
      }
      return FiniteSet::from_runs(d.arity(), std::move(runs));
    }
    case GroupKind::DirectSumCyclic: {
      std::vector<GroupElement> out;
      for (std::int64_t w = 0; w <= r; ++w)
        dsum_shell_rec(d, 0, w, 0, out, std::int64_t(1) << 22);
      return FiniteSet::from_elements(d, out);
    }
    case GroupKind::DiscreteHeisenberg:
      return FiniteSet::from_elements(d, heis_ball_elements(d, r, nullptr));
  }
  throw std::logic_error("ball: unknown kind");
}

GroupElement min_norm_element(const GroupDescriptor& d,
                              const FiniteSet& allowed) {
  if (d.kind() != GroupKind::IntegerLattice)
    throw KindMismatchError("min_norm_element: lattice groups only");
  if (allowed.empty())
    throw std::domain_error("min_norm_element: empty candidate set");
  bool have = false;
  std::int64_t best_norm = 0;
  GroupElement best;
  const int dim = d.lattice_dim();
  for (const auto& r : allowed.runs()) {
    std::int64_t pnorm = 0;
    for (int i = 0; i + 1 < dim; ++i) pnorm += std::abs(r.prefix[std::size_t(i)]);
    const std::int64_t last = std::clamp<std::int64_t>(0, r.lo, r.hi);
    const std::int64_t norm = pnorm + std::abs(last);
    std::vector<std::int64_t> coords;
    for (int i = 0; i + 1 < dim; ++i) coords.push_back(r.prefix[std::size_t(i)]);
    coords.push_back(last);
    GroupElement cand{d.kind(), std::move(coords)};
    if (!have || norm < best_norm ||
        (norm == best_norm && cand.coords < best.coords)) {
      have = true;
      best_norm = norm;
      best = std::move(cand);
    }
  }
  return best;
}

}  // namespace cflab
