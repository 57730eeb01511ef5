#include "cflab/group.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace cflab {

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::IntegerLattice:
      return "integer-lattice";
    case GroupKind::DirectSumCyclic:
      return "direct-sum-finite-cyclic";
    case GroupKind::DiscreteHeisenberg:
      return "discrete-heisenberg";
  }
  return "?";
}

std::string to_string(const GroupElement& g) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < g.coords.size(); ++i) {
    if (i) os << ",";
    os << g.coords[i];
  }
  os << ")";
  return os.str();
}

struct GroupDescriptor::Impl {
  GroupKind kind;
  int dim = 0;                        // lattice
  std::vector<std::int64_t> orders;   // direct sum: cycled order pattern
  int window = 0;                     // direct sum: active support size
  std::vector<std::int64_t> places;   // direct sum: mixed-radix place values
  std::vector<GroupElement> gens;
  std::vector<GroupElement> sym_gens;
};

GroupDescriptor::GroupDescriptor(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

GroupDescriptor GroupDescriptor::integer_lattice(int dim) {
  if (dim < 1 || dim > 3)
    throw std::invalid_argument(
        "integer-lattice: supported dimensions are 1..3, got " +
        std::to_string(dim));
  auto impl = std::make_shared<Impl>();
  impl->kind = GroupKind::IntegerLattice;
  impl->dim = dim;
  for (int i = 0; i < dim; ++i) {
    GroupElement e{GroupKind::IntegerLattice,
                   std::vector<std::int64_t>(dim, 0)};
    e.coords[i] = 1;
    impl->gens.push_back(std::move(e));
  }
  GroupDescriptor d(impl);
  std::set<GroupElement> sym;
  for (const auto& g : impl->gens) {
    sym.insert(g);
    sym.insert(inv(d, g));
  }
  const_cast<Impl*>(d.impl_.get())->sym_gens.assign(sym.begin(), sym.end());
  return d;
}

GroupDescriptor GroupDescriptor::direct_sum_cyclic(
    std::vector<std::int64_t> orders, int window) {
  if (orders.empty())
    throw std::invalid_argument("direct-sum: orders list must be nonempty");
  for (auto m : orders)
    if (m < 2)
      throw std::invalid_argument("direct-sum: every order must be >= 2");
  if (window < 1)
    throw std::invalid_argument("direct-sum: window must be >= 1");
  auto impl = std::make_shared<Impl>();
  impl->kind = GroupKind::DirectSumCyclic;
  impl->orders = std::move(orders);
  impl->window = window;
  impl->places.resize(window + 1);
  impl->places[0] = 1;
  const std::int64_t cap = std::int64_t(1) << 62;
  for (int i = 0; i < window; ++i) {
    const std::int64_t m = impl->orders[i % impl->orders.size()];
    if (impl->places[i] > cap / m)
      throw std::invalid_argument(
          "direct-sum: window " + std::to_string(window) +
          " exceeds the representable capacity for these orders");
    impl->places[i + 1] = impl->places[i] * m;
  }
  for (int i = 0; i < window; ++i)
    impl->gens.push_back(
        GroupElement{GroupKind::DirectSumCyclic, {impl->places[i]}});
  GroupDescriptor d(impl);
  std::set<GroupElement> sym;
  for (const auto& g : impl->gens) {
    sym.insert(g);
    sym.insert(inv(d, g));
  }
  const_cast<Impl*>(d.impl_.get())->sym_gens.assign(sym.begin(), sym.end());
  return d;
}

GroupDescriptor GroupDescriptor::discrete_heisenberg() {
  auto impl = std::make_shared<Impl>();
  impl->kind = GroupKind::DiscreteHeisenberg;
  impl->gens = {GroupElement{GroupKind::DiscreteHeisenberg, {1, 0, 0}},
                GroupElement{GroupKind::DiscreteHeisenberg, {0, 1, 0}}};
  GroupDescriptor d(impl);
  std::set<GroupElement> sym;
  for (const auto& g : impl->gens) {
    sym.insert(g);
    sym.insert(inv(d, g));
  }
  const_cast<Impl*>(d.impl_.get())->sym_gens.assign(sym.begin(), sym.end());
  return d;
}

GroupKind GroupDescriptor::kind() const { return impl_->kind; }

int GroupDescriptor::arity() const {
  switch (impl_->kind) {
    case GroupKind::IntegerLattice:
      return impl_->dim;
    case GroupKind::DirectSumCyclic:
      return 1;
    case GroupKind::DiscreteHeisenberg:
      return 3;
  }
  return 1;
}

int GroupDescriptor::lattice_dim() const {
  if (impl_->kind != GroupKind::IntegerLattice)
    throw KindMismatchError("lattice_dim: not an integer lattice");
  return impl_->dim;
}

int GroupDescriptor::window() const {
  if (impl_->kind != GroupKind::DirectSumCyclic)
    throw KindMismatchError("window: not a direct sum");
  return impl_->window;
}

const std::vector<std::int64_t>& GroupDescriptor::cyclic_orders() const {
  if (impl_->kind != GroupKind::DirectSumCyclic)
    throw KindMismatchError("cyclic_orders: not a direct sum");
  return impl_->orders;
}

std::int64_t GroupDescriptor::order_at(int index) const {
  if (impl_->kind != GroupKind::DirectSumCyclic)
    throw KindMismatchError("order_at: not a direct sum");
  if (index < 0 || index >= impl_->window)
    throw std::out_of_range("order_at: index outside window");
  return impl_->orders[index % impl_->orders.size()];
}

std::int64_t GroupDescriptor::place(int index) const {
  if (impl_->kind != GroupKind::DirectSumCyclic)
    throw KindMismatchError("place: not a direct sum");
  if (index < 0 || index > impl_->window)
    throw std::out_of_range("place: index outside window");
  return impl_->places[index];
}

std::int64_t GroupDescriptor::span_size(int digits) const {
  return place(digits);
}

const std::vector<GroupElement>& GroupDescriptor::generators() const {
  return impl_->gens;
}

const std::vector<GroupElement>& GroupDescriptor::symmetric_generators()
    const {
  return impl_->sym_gens;
}

GroupElement GroupDescriptor::identity() const {
  return GroupElement{impl_->kind,
                      std::vector<std::int64_t>(std::size_t(arity()), 0)};
}

GroupElement GroupDescriptor::element(std::vector<std::int64_t> coords) const {
  if (static_cast<int>(coords.size()) != arity())
    throw std::invalid_argument("element: expected " +
                                std::to_string(arity()) + " coordinates, got " +
                                std::to_string(coords.size()));
  if (impl_->kind == GroupKind::DirectSumCyclic) {
    if (coords[0] < 0 || coords[0] >= impl_->places[impl_->window])
      throw std::invalid_argument(
          "element: direct-sum code outside window capacity");
  }
  return GroupElement{impl_->kind, std::move(coords)};
}

GroupElement GroupDescriptor::dsum_from_pairs(
    const std::vector<std::pair<int, std::int64_t>>& pairs) const {
  if (impl_->kind != GroupKind::DirectSumCyclic)
    throw KindMismatchError("dsum_from_pairs: not a direct sum");
  std::int64_t code = 0;
  std::set<int> seen;
  for (const auto& [idx, res] : pairs) {
    if (idx < 0 || idx >= impl_->window)
      throw std::invalid_argument(
          "direct-sum element: support index " + std::to_string(idx) +
          " outside window [0," + std::to_string(impl_->window) + ")");
    if (!seen.insert(idx).second)
      throw std::invalid_argument("direct-sum element: duplicate index " +
                                  std::to_string(idx));
    const std::int64_t m = impl_->orders[idx % impl_->orders.size()];
    std::int64_t r = res % m;
    if (r < 0) r += m;
    code += r * impl_->places[idx];
  }
  return GroupElement{GroupKind::DirectSumCyclic, {code}};
}

std::vector<std::pair<int, std::int64_t>> GroupDescriptor::dsum_pairs(
    const GroupElement& g) const {
  require_same_kind(*this, g, "dsum_pairs");
  std::vector<std::pair<int, std::int64_t>> out;
  std::int64_t code = g.coords[0];
  for (int i = 0; i < impl_->window && code != 0; ++i) {
    const std::int64_t m = impl_->orders[i % impl_->orders.size()];
    const std::int64_t r = code % m;
    code /= m;
    if (r != 0) out.emplace_back(i, r);
  }
  return out;
}

bool GroupDescriptor::operator==(const GroupDescriptor& o) const {
  if (impl_ == o.impl_) return true;
  return impl_->kind == o.impl_->kind && impl_->dim == o.impl_->dim &&
         impl_->orders == o.impl_->orders && impl_->window == o.impl_->window;
}

void require_same_kind(const GroupDescriptor& d, const GroupElement& g,
                       const char* who) {
  if (g.kind != d.kind())
    throw KindMismatchError(std::string(who) + ": element of kind " +
                            to_string(g.kind) + " used with group " +
                            to_string(d.kind()));
  if (static_cast<int>(g.coords.size()) != d.arity())
    throw KindMismatchError(std::string(who) +
                            ": element has wrong coordinate count");
}

namespace {

std::int64_t dsum_digit_add(const GroupDescriptor& d, std::int64_t a,
                            std::int64_t b) {
  std::int64_t out = 0;
  for (int i = 0; i < d.window(); ++i) {
    if (a == 0 && b == 0) break;
    const std::int64_t m = d.order_at(i);
    const std::int64_t r = (a % m + b % m) % m;
    out += r * d.place(i);
    a /= m;
    b /= m;
  }
  return out;
}

std::int64_t dsum_digit_neg(const GroupDescriptor& d, std::int64_t a) {
  std::int64_t out = 0;
  for (int i = 0; i < d.window(); ++i) {
    if (a == 0) break;
    const std::int64_t m = d.order_at(i);
    const std::int64_t r = (m - a % m) % m;
    out += r * d.place(i);
    a /= m;
  }
  return out;
}

}  // namespace

GroupElement mul(const GroupDescriptor& d, const GroupElement& a,
                 const GroupElement& b) {
  require_same_kind(d, a, "mul");
  require_same_kind(d, b, "mul");
  switch (d.kind()) {
    case GroupKind::IntegerLattice: {
      GroupElement out = a;
      for (std::size_t i = 0; i < out.coords.size(); ++i)
        out.coords[i] += b.coords[i];
      return out;
    }
    case GroupKind::DirectSumCyclic:
      return GroupElement{d.kind(), {dsum_digit_add(d, a.coords[0],
                                                    b.coords[0])}};
    case GroupKind::DiscreteHeisenberg:
      return GroupElement{
          d.kind(),
          {a.coords[0] + b.coords[0], a.coords[1] + b.coords[1],
           a.coords[2] + b.coords[2] + a.coords[0] * b.coords[1]}};
  }
  throw std::logic_error("mul: unknown kind");
}

GroupElement inv(const GroupDescriptor& d, const GroupElement& a) {
  require_same_kind(d, a, "inv");
  switch (d.kind()) {
    case GroupKind::IntegerLattice: {
      GroupElement out = a;
      for (auto& c : out.coords) c = -c;
      return out;
    }
    case GroupKind::DirectSumCyclic:
      return GroupElement{d.kind(), {dsum_digit_neg(d, a.coords[0])}};
    case GroupKind::DiscreteHeisenberg:
      return GroupElement{d.kind(),
                          {-a.coords[0], -a.coords[1],
                           -a.coords[2] + a.coords[0] * a.coords[1]}};
  }
  throw std::logic_error("inv: unknown kind");
}

GroupElement power(const GroupDescriptor& d, const GroupElement& a,
                   std::int64_t n) {
  require_same_kind(d, a, "power");
  GroupElement base = n < 0 ? inv(d, a) : a;
  std::int64_t k = n < 0 ? -n : n;
  GroupElement acc = d.identity();
  while (k > 0) {
    if (k & 1) acc = mul(d, acc, base);
    base = mul(d, base, base);
    k >>= 1;
  }
  return acc;
}

std::optional<std::int64_t> order_of(const GroupDescriptor& d,
                                     const GroupElement& g,
                                     std::int64_t bound) {
  require_same_kind(d, g, "order_of");
  if (bound < 1) throw std::invalid_argument("order_of: bound must be >= 1");
  const GroupElement id = d.identity();
  GroupElement cur = g;
  for (std::int64_t n = 1; n <= bound; ++n) {
    if (cur == id) return n;
    cur = mul(d, cur, g);
  }
  return std::nullopt;
}

bool torsion_kind(GroupKind kind) {
  return kind == GroupKind::DirectSumCyclic;
}

std::optional<std::int64_t> norm_bounded(const GroupDescriptor& d,
                                         const GroupElement& g,
                                         std::int64_t heis_cap) {
  require_same_kind(d, g, "norm");
  switch (d.kind()) {
    case GroupKind::IntegerLattice: {
      std::int64_t n = 0;
      for (auto c : g.coords) n += c < 0 ? -c : c;
      return n;
    }
    case GroupKind::DirectSumCyclic: {
      std::int64_t n = 0, code = g.coords[0];
      for (int i = 0; i < d.window() && code != 0; ++i) {
        const std::int64_t m = d.order_at(i);
        const std::int64_t r = code % m;
        code /= m;
        n += std::min(r, m - r);
      }
      return n;
    }
    case GroupKind::DiscreteHeisenberg: {
      // Graph distance from the identity; no useful closed form, so walk
      // shells outward until g appears or the cap is hit.
      if (g == d.identity()) return 0;
      std::set<GroupElement> seen{d.identity()};
      std::vector<GroupElement> frontier{d.identity()};
      for (std::int64_t r = 1; r <= heis_cap; ++r) {
        std::vector<GroupElement> next;
        for (const auto& v : frontier)
          for (const auto& s : d.symmetric_generators()) {
            GroupElement w = mul(d, v, s);
            if (w == g) return r;
            if (seen.insert(w).second) next.push_back(std::move(w));
          }
        frontier = std::move(next);
        if (frontier.empty()) break;
      }
      return std::nullopt;
    }
  }
  throw std::logic_error("norm: unknown kind");
}

}  // namespace cflab
