#include "kronsensus/group.hpp"

#include <charconv>
#include <numeric>
#include <set>

namespace kronsensus {

AbelianGroup::AbelianGroup(std::vector<Index> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw DomainError("group needs at least one cyclic factor");
  for (Index d : dims_) {
    if (d < 1) throw DomainError("cyclic factor orders must be positive");
    if (order_ > (Index{1} << 40) / d) throw SizeError("group order too large");
    order_ *= d;
  }
}

AbelianGroup AbelianGroup::parse(const std::string& text) {
  std::vector<Index> dims;
  std::size_t start = 0;
  while (true) {
    const std::size_t stop = text.find('x', start);
    const std::string part = text.substr(start, stop == std::string::npos ? std::string::npos : stop - start);
    Index d = 0;
    auto res = std::from_chars(part.data(), part.data() + part.size(), d);
    if (part.empty() || res.ec != std::errc() || res.ptr != part.data() + part.size()) {
      throw DomainError("bad group specification '" + text + "'");
    }
    dims.push_back(d);
    if (stop == std::string::npos) break;
    start = stop + 1;
  }
  return AbelianGroup(std::move(dims));
}

GroupElement AbelianGroup::canonical(const GroupElement& g) const {
  if (g.size() != dims_.size()) {
    throw DomainError("group element has " + std::to_string(g.size()) + " coordinates, group has " +
                      std::to_string(dims_.size()));
  }
  GroupElement out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = ((g[i] % dims_[i]) + dims_[i]) % dims_[i];
  return out;
}

Index AbelianGroup::index_of(const GroupElement& g) const {
  const GroupElement c = canonical(g);
  Index out = 0;
  for (std::size_t i = 0; i < c.size(); ++i) out = out * dims_[i] + c[i];
  return out;
}

GroupElement AbelianGroup::element_of(Index index) const {
  if (index < 0 || index >= order_) throw DomainError("group index out of range");
  GroupElement out(dims_.size());
  for (std::size_t i = dims_.size(); i-- > 0;) {
    out[i] = index % dims_[i];
    index /= dims_[i];
  }
  return out;
}

Index AbelianGroup::difference(Index a, Index b) const {
  Index out = 0;
  Index stride = 1;
  for (std::size_t i = dims_.size(); i-- > 0;) {
    const Index d = dims_[i];
    const Index da = a % d;
    const Index db = b % d;
    out += ((da - db + d) % d) * stride;
    stride *= d;
    a /= d;
    b /= d;
  }
  return out;
}

std::string AbelianGroup::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i > 0) out += 'x';
    out += std::to_string(dims_[i]);
  }
  return out;
}

std::vector<double> generator_weights(const AbelianGroup& group, const Generator& pi) {
  std::vector<double> w(static_cast<std::size_t>(group.order()), 0.0);
  for (const auto& e : pi) {
    if (!std::isfinite(e.weight)) throw DomainError("generator weight is not finite");
    w[static_cast<std::size_t>(group.index_of(e.element))] += e.weight;
  }
  return w;
}

std::vector<Index> generator_support(const AbelianGroup& group, const Generator& pi) {
  const auto w = generator_weights(group, pi);
  std::vector<Index> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (std::abs(w[i]) > tol::kZero) out.push_back(static_cast<Index>(i));
  }
  return out;
}

Generator uniform_generator(const std::vector<GroupElement>& support) {
  if (support.empty()) throw DomainError("uniform generator needs a nonempty support");
  Generator out;
  const double w = 1.0 / static_cast<double>(support.size());
  for (const auto& g : support) out.push_back({g, w});
  return out;
}

MatrixXd cayley_matrix(const AbelianGroup& group, const Generator& pi, const Limits& limits) {
  const Index n = group.order();
  if (n > limits.max_strategy_dim) {
    throw SizeError("Cayley matrix of order " + std::to_string(n) + " exceeds cap " +
                    std::to_string(limits.max_strategy_dim));
  }
  const auto w = generator_weights(group, pi);
  MatrixXd p(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) p(i, j) = w[static_cast<std::size_t>(group.difference(i, j))];
  }
  return p;
}

std::vector<Complex> character_sums(const AbelianGroup& group, const Generator& pi) {
  const auto w = generator_weights(group, pi);
  const auto support = generator_support(group, pi);
  const auto& dims = group.dims();
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(group.order()));
  for (Index chi = 0; chi < group.order(); ++chi) {
    const GroupElement c = group.element_of(chi);
    Complex lambda{0.0, 0.0};
    for (Index g : support) {
      const GroupElement e = group.element_of(g);
      // Phase sum_i c_i e_i / d_i, reduced to [0,1) per coordinate for accuracy.
      double phase = 0.0;
      for (std::size_t i = 0; i < dims.size(); ++i) {
        phase += static_cast<double>((c[i] * e[i]) % dims[i]) / static_cast<double>(dims[i]);
      }
      lambda += w[static_cast<std::size_t>(g)] * std::polar(1.0, 2.0 * std::numbers::pi * phase);
    }
    out.push_back(lambda);
  }
  return out;
}

}  // namespace kronsensus
