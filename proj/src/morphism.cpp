#include "ncfractal/morphism.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ncfractal {

namespace {

Element apply_linear(const Algebra& alg, const RMatrix& m, const Element& x) {
  if (!x.same_shape(alg.zero())) throw StructuralError("morphism applied to an element of another algebra");
  const Element xa = x.adjoint();
  const RVector re = alg.coords(x + xa) * 0.5;
  // (x - x*)/(2i) is self-adjoint; f(x) = f(re) + i f(im).
  const RVector im = alg.coords((x - xa) * Complex(0.0, -0.5));
  return alg.from_coords(m * re) + alg.from_coords(m * im) * Complex(0.0, 1.0);
}

void require_unitary(const Element& u, const char* what) {
  const Element defect = u * u.adjoint() - u.algebra().unit();
  if (defect.max_abs() > 1e-10) throw DomainError(std::string(what) + ": element is not unitary");
}

/// Complex matrix units E^b_ij of every block.
std::vector<Element> matrix_units(const Algebra& alg) {
  std::vector<Element> out;
  for (int b = 0; b < alg.num_blocks(); ++b) {
    const int n = alg.block_dim(b);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Element e = alg.zero();
        std::vector<CMatrix> blocks = e.blocks();
        blocks[b](i, j) = 1.0;
        out.emplace_back(std::move(blocks));
      }
    }
  }
  return out;
}

}  // namespace

const char* to_string(HomKind kind) {
  switch (kind) {
    case HomKind::unitary: return "unitary";
    case HomKind::point_map: return "point_map";
    case HomKind::pattern: return "pattern";
    case HomKind::composite: return "composite";
    case HomKind::custom: return "custom";
  }
  return "custom";
}

// ---------------------------------------------------------------- StarHom

StarHom StarHom::from_matrix(Algebra alg, RMatrix matrix, HomKind kind) {
  if (matrix.rows() != alg.real_dim() || matrix.cols() != alg.real_dim()) {
    throw StructuralError("morphism matrix does not match the algebra's real dimension");
  }
  return StarHom(std::move(alg), std::move(matrix), kind);
}

StarHom StarHom::from_map(const Algebra& alg, const std::function<Element(const Element&)>& fn,
                          HomKind kind) {
  RMatrix m(alg.real_dim(), alg.real_dim());
  for (int k = 0; k < alg.real_dim(); ++k) m.col(k) = alg.coords(fn(alg.basis_element(k)));
  return StarHom(alg, std::move(m), kind);
}

StarHom StarHom::identity(const Algebra& alg) {
  return StarHom(alg, RMatrix::Identity(alg.real_dim(), alg.real_dim()), HomKind::composite);
}

Element StarHom::operator()(const Element& x) const { return apply_linear(algebra_, matrix_, x); }

Projection StarHom::operator()(const Projection& p) const { return Projection::repaired((*this)(p.element())); }

Element StarHom::adjoint_apply(const Element& x) const {
  return apply_linear(algebra_, matrix_.transpose(), x);
}

StarHom StarHom::compose(const StarHom& other) const {
  if (!(algebra_ == other.algebra_)) throw StructuralError("compose: morphisms act on different algebras");
  StarHom out(algebra_, matrix_ * other.matrix_, HomKind::composite);
  if (point_map_ && other.point_map_) {
    // f(h(b)) = b o g_h o g_f
    std::vector<int> g(point_map_->size());
    for (std::size_t x = 0; x < g.size(); ++x) g[x] = (*other.point_map_)[(*point_map_)[x]];
    out.point_map_ = std::move(g);
  }
  return out;
}

// ---------------------------------------------------------------- constructors

StarHom hom_from_unitary(const Element& u) {
  require_unitary(u, "hom_from_unitary");
  const Element ua = u.adjoint();
  return StarHom::from_map(u.algebra(), [&](const Element& b) { return u * b * ua; }, HomKind::unitary);
}

StarHom hom_from_point_map(std::span<const int> g) {
  const int n = static_cast<int>(g.size());
  if (n == 0) throw DomainError("point map on an empty space");
  RMatrix m = RMatrix::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    if (g[x] < 0 || g[x] >= n) {
      std::ostringstream msg;
      msg << "point map sends " << x << " to " << g[x] << ", outside 0.." << n - 1;
      throw DomainError(msg.str());
    }
    m(x, g[x]) = 1.0;
  }
  StarHom f = StarHom::from_matrix(Algebra::diagonal(n), std::move(m), HomKind::point_map);
  f.point_map_ = std::vector<int>(g.begin(), g.end());
  return f;
}

StarHom hom_from_pattern(const Algebra& alg, const std::vector<std::vector<PatternEntry>>& targets,
                         const std::optional<Element>& twist) {
  if (static_cast<int>(targets.size()) != alg.num_blocks()) {
    throw DomainError("pattern must list one source assignment per target block");
  }
  for (int t = 0; t < alg.num_blocks(); ++t) {
    int dim = 0;
    for (const auto& e : targets[t]) {
      if (e.source_block < 0 || e.source_block >= alg.num_blocks()) {
        throw DomainError("pattern refers to a missing source block");
      }
      if (e.multiplicity < 1) throw DomainError("pattern multiplicities must be positive");
      dim += alg.block_dim(e.source_block) * e.multiplicity;
    }
    if (dim != alg.block_dim(t)) {
      std::ostringstream msg;
      msg << "pattern fills target block " << t << " with dimension " << dim << ", expected "
          << alg.block_dim(t);
      throw DomainError(msg.str());
    }
  }
  if (twist) {
    if (!twist->same_shape(alg.zero())) throw StructuralError("pattern twist lives in another algebra");
    require_unitary(*twist, "hom_from_pattern");
  }

  auto copy = [&alg, &targets, &twist](const Element& x) {
    std::vector<CMatrix> out;
    for (int t = 0; t < alg.num_blocks(); ++t) {
      const int n = alg.block_dim(t);
      CMatrix m = CMatrix::Zero(n, n);
      int at = 0;
      for (const auto& e : targets[t]) {
        const int s = alg.block_dim(e.source_block);
        for (int r = 0; r < e.multiplicity; ++r) {
          m.block(at, at, s, s) = x.block(e.source_block);
          at += s;
        }
      }
      if (twist) m = twist->block(t) * m * twist->block(t).adjoint();
      out.push_back(std::move(m));
    }
    return Element(std::move(out));
  };
  return StarHom::from_map(alg, copy, HomKind::pattern);
}

HomReport validate_hom(const StarHom& f, double tol) {
  const Algebra& alg = f.algebra();
  const std::vector<Element> units = matrix_units(alg);
  std::vector<Element> images;
  images.reserve(units.size());
  for (const auto& e : units) images.push_back(f(e));

  HomReport r;
  r.tol = tol;
  for (std::size_t i = 0; i < units.size(); ++i) {
    r.adjoint = std::max(r.adjoint, max_abs_diff(f(units[i].adjoint()), images[i].adjoint()));
    for (std::size_t j = 0; j < units.size(); ++j) {
      const Element lhs = f(units[i] * units[j]);
      r.multiplicativity = std::max(r.multiplicativity, max_abs_diff(lhs, images[i] * images[j]));
    }
  }
  r.unitality = max_abs_diff(f(alg.unit()), alg.unit());
  r.pass = r.multiplicativity <= tol && r.adjoint <= tol && r.unitality <= tol;
  return r;
}

// ---------------------------------------------------------------- DualIFS, Word, Weights

DualIFS::DualIFS(std::vector<StarHom> homs, std::vector<std::string> names)
    : homs_(std::move(homs)), names_(std::move(names)) {
  if (homs_.empty()) throw DomainError("a dual IFS needs at least one morphism");
  for (std::size_t i = 0; i < homs_.size(); ++i) {
    if (!(homs_[i].algebra() == homs_.front().algebra())) {
      throw StructuralError("dual IFS morphisms must share one algebra");
    }
    const HomReport rep = validate_hom(homs_[i]);
    if (!rep.pass) {
      std::ostringstream msg;
      msg << "morphism " << i << " is not a unital *-homomorphism (multiplicativity " << rep.multiplicativity
          << ", adjoint " << rep.adjoint << ", unitality " << rep.unitality << ")";
      throw DomainError(msg.str());
    }
  }
  if (names_.empty()) {
    for (std::size_t i = 0; i < homs_.size(); ++i) names_.push_back("f" + std::to_string(i));
  }
  if (names_.size() != homs_.size()) throw StructuralError("dual IFS: one name per morphism");
}

std::string Word::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < letters.size(); ++i) {
    if (i > 0 && alphabet > 10) s += '.';
    s += std::to_string(letters[i]);
  }
  return s;
}

Weights::Weights(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("weights must be non-empty");
  double sum = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("weights must be finite and nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw DomainError("weights sum to " + std::to_string(sum) + ", expected 1");
  }
}

Weights Weights::uniform(int k) {
  return Weights(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k));
}

bool Weights::strict() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v > 0.0; });
}

// ---------------------------------------------------------------- operations

StarHom word_hom(const DualIFS& ifs, const Word& w) {
  if (w.alphabet != 0 && w.alphabet != ifs.size()) {
    throw DomainError("word alphabet does not match the IFS size");
  }
  for (int l : w.letters) {
    if (l < 0 || l >= ifs.size()) throw DomainError("word letter " + std::to_string(l) + " outside the alphabet");
  }
  if (w.letters.empty()) return StarHom::identity(ifs.algebra());
  StarHom out = ifs[w.letters.front()];
  for (std::size_t m = 1; m < w.letters.size(); ++m) out = out.compose(ifs[w.letters[m]]);
  return out;
}

State dual_apply(const StarHom& f, const State& rho) {
  try {
    return State::from_density(f.adjoint_apply(rho.density()));
  } catch (const DomainError& e) {
    throw NumericalError(std::string("dual_apply produced an invalid state: ") + e.what());
  }
}

Projection upper_preimage(const StarHom& f, const Projection& p, double tol) {
  return range_projection(f.adjoint_apply(p.element()), tol);
}

}  // namespace ncfractal
