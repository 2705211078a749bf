#pragma once

// Unital *-endomorphisms of a finite-dimensional algebra, their trace-adjoint
// (dual) action on states, word compositions and upper pre-images.
//
// In a unital algebra the constant net (I) is an approximate identity, so a
// morphism is relatively proper exactly when f(I) = I.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncfractal/algebra.hpp"

namespace ncfractal {

enum class HomKind { unitary, point_map, pattern, composite, custom };

const char* to_string(HomKind kind);

/// Real-linear map on the coordinatised self-adjoint part, extended
/// complex-linearly to the whole algebra.
class StarHom {
 public:
  /// No validation; pair with validate_hom.
  static StarHom from_matrix(Algebra alg, RMatrix matrix, HomKind kind = HomKind::custom);
  /// Samples `fn` on the self-adjoint basis. No validation.
  static StarHom from_map(const Algebra& alg, const std::function<Element(const Element&)>& fn,
                          HomKind kind = HomKind::custom);
  static StarHom identity(const Algebra& alg);

  Element operator()(const Element& x) const;
  Projection operator()(const Projection& p) const;

  /// Trace-adjoint f_*: the unique sigma with trace(sigma b) = trace(x f(b)).
  Element adjoint_apply(const Element& x) const;

  const Algebra& algebra() const { return algebra_; }
  const RMatrix& matrix() const { return matrix_; }
  HomKind kind() const { return kind_; }
  /// Present for morphisms built from a point map g: (f b)_x = b_{g(x)}.
  const std::optional<std::vector<int>>& point_map() const { return point_map_; }

  /// this o other
  StarHom compose(const StarHom& other) const;

 private:
  friend StarHom hom_from_point_map(std::span<const int> g);

  StarHom(Algebra alg, RMatrix matrix, HomKind kind)
      : algebra_(std::move(alg)), matrix_(std::move(matrix)), kind_(kind) {}

  Algebra algebra_;
  RMatrix matrix_;
  HomKind kind_;
  std::optional<std::vector<int>> point_map_;
};

/// b -> u b u*.
StarHom hom_from_unitary(const Element& u);

/// b -> b o g on the diagonal algebra C^n, n = g.size().
StarHom hom_from_point_map(std::span<const int> g);

struct PatternEntry {
  int source_block;
  int multiplicity;
};

/// Bratteli-style unital embedding: target block t receives the direct sum of
/// copies x_s (x) I_m of the listed source blocks, conjugated by the optional
/// block unitary `twist`.
StarHom hom_from_pattern(const Algebra& alg, const std::vector<std::vector<PatternEntry>>& targets,
                         const std::optional<Element>& twist = std::nullopt);

struct HomReport {
  double multiplicativity = 0.0;
  double adjoint = 0.0;
  double unitality = 0.0;
  double tol = 0.0;
  bool pass = false;
};

/// Max defects of f(xy) = f(x)f(y) and f(x*) = f(x)* over the matrix-unit
/// basis, and of f(I) = I.
HomReport validate_hom(const StarHom& f, double tol = 1e-9);

/// Common-algebra list of validated unital *-endomorphisms.
class DualIFS {
 public:
  explicit DualIFS(std::vector<StarHom> homs, std::vector<std::string> names = {});

  int size() const { return static_cast<int>(homs_.size()); }
  const StarHom& operator[](int i) const { return homs_.at(i); }
  const std::vector<StarHom>& homs() const { return homs_; }
  const std::vector<std::string>& names() const { return names_; }
  const Algebra& algebra() const { return homs_.front().algebra(); }

 private:
  std::vector<StarHom> homs_;
  std::vector<std::string> names_;
};

/// Finite word over the alphabet {0, ..., k-1}.
struct Word {
  std::vector<int> letters;
  int alphabet = 0;

  std::size_t length() const { return letters.size(); }
  std::string to_string() const;
};

/// Probability vector over the maps of an IFS.
class Weights {
 public:
  explicit Weights(std::vector<double> values);
  static Weights uniform(int k);

  std::span<const double> values() const { return values_; }
  double operator[](int i) const { return values_.at(i); }
  int size() const { return static_cast<int>(values_.size()); }
  /// Every entry is strictly positive.
  bool strict() const;

 private:
  std::vector<double> values_;
};

/// f_w = f_{w_1} o ... o f_{w_M}; the empty word gives the identity.
StarHom word_hom(const DualIFS& ifs, const Word& w);

/// f^* phi = phi o f as a density.
State dual_apply(const StarHom& f, const State& rho);

/// /\ { q : f(q) >= p }, computed as the range projection of f_*(p).
Projection upper_preimage(const StarHom& f, const Projection& p, double tol = kEigenTol);

}  // namespace ncfractal
