#pragma once

#include <string>
#include <vector>

#include "kronsensus/matlin.hpp"

namespace kronsensus {

// An element given by one (possibly negative) representative per coordinate.
using GroupElement = std::vector<Index>;

/// Z_{d1} x ... x Z_{dm}. Elements are flattened with the first coordinate
/// most significant.
class AbelianGroup {
 public:
  explicit AbelianGroup(std::vector<Index> dims);

  // "81", "3x3", "4x4x4".
  static AbelianGroup parse(const std::string& text);

  const std::vector<Index>& dims() const { return dims_; }
  Index rank() const { return static_cast<Index>(dims_.size()); }
  Index order() const { return order_; }

  // Reduces each coordinate to [0, d); throws DomainError on a rank mismatch.
  GroupElement canonical(const GroupElement& g) const;
  Index index_of(const GroupElement& g) const;
  GroupElement element_of(Index index) const;
  // index_of(element_of(a) - element_of(b)).
  Index difference(Index a, Index b) const;

  std::string to_string() const;
  friend bool operator==(const AbelianGroup&, const AbelianGroup&) = default;

 private:
  std::vector<Index> dims_;
  Index order_ = 1;
};

struct GeneratorEntry {
  GroupElement element;
  double weight = 0;
};

/// The generator pi of a Cayley matrix: pi(g) for g in the support S.
using Generator = std::vector<GeneratorEntry>;

// Dense pi over the flattened group; repeated elements accumulate.
std::vector<double> generator_weights(const AbelianGroup& group, const Generator& pi);
std::vector<Index> generator_support(const AbelianGroup& group, const Generator& pi);
Generator uniform_generator(const std::vector<GroupElement>& support);

/// P_{ij} = pi(i - j).
MatrixXd cayley_matrix(const AbelianGroup& group, const Generator& pi, const Limits& limits = {});

/// lambda_chi = sum_g pi(g) chi(g), one value per character, in the
/// order of the flattened character index.
std::vector<Complex> character_sums(const AbelianGroup& group, const Generator& pi);

}  // namespace kronsensus
