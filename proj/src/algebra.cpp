#include "ncfractal/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ncfractal {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

Eigen::SelfAdjointEigenSolver<CMatrix> hermitian_eigen(const CMatrix& m) {
  CMatrix h = 0.5 * (m + m.adjoint());
  return Eigen::SelfAdjointEigenSolver<CMatrix>(h);
}

void require_same_shape(const Element& a, const Element& b, const char* what) {
  if (!a.same_shape(b)) {
    throw StructuralError(std::string(what) + ": elements belong to different algebras");
  }
}

}  // namespace

// ---------------------------------------------------------------- Algebra

Algebra::Algebra(std::vector<int> block_dims) : dims_(std::move(block_dims)) {
  if (dims_.empty()) throw DomainError("algebra needs at least one block");
  for (int n : dims_) {
    if (n < 1) throw DomainError("block dimensions must be positive");
    coord_offsets_.push_back(real_dim_);
    total_dim_ += n;
    real_dim_ += n * n;
  }
}

Algebra Algebra::diagonal(int n) {
  if (n < 1) throw DomainError("diagonal algebra needs at least one point");
  return Algebra(std::vector<int>(static_cast<std::size_t>(n), 1));
}

bool Algebra::is_diagonal() const {
  return std::all_of(dims_.begin(), dims_.end(), [](int n) { return n == 1; });
}

Element Algebra::unit() const {
  std::vector<CMatrix> blocks;
  for (int n : dims_) blocks.push_back(CMatrix::Identity(n, n));
  return Element(std::move(blocks));
}

Element Algebra::zero() const {
  std::vector<CMatrix> blocks;
  for (int n : dims_) blocks.push_back(CMatrix::Zero(n, n));
  return Element(std::move(blocks));
}

Element Algebra::basis_element(int k) const {
  RVector v = RVector::Zero(real_dim_);
  v(k) = 1.0;
  return from_coords(v);
}

RVector Algebra::coords(const Element& x) const {
  if (x.num_blocks() != num_blocks()) throw StructuralError("coords: block count mismatch");
  RVector v(real_dim_);
  for (int b = 0; b < num_blocks(); ++b) {
    const int n = dims_[b];
    const CMatrix& m = x.block(b);
    if (m.rows() != n) throw StructuralError("coords: block shape mismatch");
    int k = coord_offsets_[b];
    for (int i = 0; i < n; ++i) v(k++) = m(i, i).real();
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        v(k++) = (m(i, j).real() + m(j, i).real()) * kInvSqrt2;
        v(k++) = (m(i, j).imag() - m(j, i).imag()) * kInvSqrt2;
      }
    }
  }
  return v;
}

Element Algebra::from_coords(const RVector& v) const {
  if (v.size() != real_dim_) throw StructuralError("from_coords: wrong coordinate length");
  std::vector<CMatrix> blocks;
  for (int b = 0; b < num_blocks(); ++b) {
    const int n = dims_[b];
    CMatrix m = CMatrix::Zero(n, n);
    int k = coord_offsets_[b];
    for (int i = 0; i < n; ++i) m(i, i) = v(k++);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double s = v(k++) * kInvSqrt2;
        const double a = v(k++) * kInvSqrt2;
        m(i, j) = Complex(s, a);
        m(j, i) = Complex(s, -a);
      }
    }
    blocks.push_back(std::move(m));
  }
  return Element(std::move(blocks));
}

// ---------------------------------------------------------------- Element

Element::Element(std::vector<CMatrix> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw StructuralError("element needs at least one block");
  for (const auto& m : blocks_) {
    if (m.rows() != m.cols() || m.rows() < 1) {
      throw StructuralError("element blocks must be non-empty square matrices");
    }
  }
}

Element Element::diagonal(std::span<const double> entries) {
  return diagonal(Algebra::diagonal(static_cast<int>(entries.size())), entries);
}

Element Element::diagonal(const Algebra& alg, std::span<const double> entries) {
  if (static_cast<int>(entries.size()) != alg.total_dim()) {
    throw StructuralError("diagonal: entry count does not match the algebra");
  }
  std::vector<CMatrix> blocks;
  std::size_t k = 0;
  for (int n : alg.block_dims()) {
    CMatrix m = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = entries[k++];
    blocks.push_back(std::move(m));
  }
  return Element(std::move(blocks));
}

Algebra Element::algebra() const {
  std::vector<int> dims;
  for (const auto& m : blocks_) dims.push_back(static_cast<int>(m.rows()));
  return Algebra(std::move(dims));
}

bool Element::same_shape(const Element& other) const {
  if (blocks_.size() != other.blocks_.size()) return false;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].rows() != other.blocks_[b].rows()) return false;
  }
  return true;
}

Element Element::adjoint() const {
  std::vector<CMatrix> out;
  for (const auto& m : blocks_) out.push_back(m.adjoint());
  return Element(std::move(out));
}

bool Element::is_self_adjoint(double tol) const {
  for (const auto& m : blocks_) {
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

Element Element::hermitian_part() const {
  std::vector<CMatrix> out;
  for (const auto& m : blocks_) out.push_back(0.5 * (m + m.adjoint()));
  return Element(std::move(out));
}

double Element::max_abs() const {
  double r = 0.0;
  for (const auto& m : blocks_) r = std::max(r, m.cwiseAbs().maxCoeff());
  return r;
}

double Element::op_norm() const {
  double r = 0.0;
  for (const auto& m : blocks_) {
    Eigen::JacobiSVD<CMatrix> svd(m);
    r = std::max(r, svd.singularValues()(0));
  }
  return r;
}

double Element::trace_norm() const {
  if (!is_self_adjoint(1e-9)) throw DomainError("trace_norm: element is not self-adjoint");
  double r = 0.0;
  for (const auto& m : blocks_) r += hermitian_eigen(m).eigenvalues().cwiseAbs().sum();
  return r;
}

std::vector<Complex> Element::diagonal_entries() const {
  std::vector<Complex> out;
  for (const auto& m : blocks_) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(m(i, i));
  }
  return out;
}

Element& Element::operator+=(const Element& other) {
  require_same_shape(*this, other, "operator+");
  for (std::size_t b = 0; b < blocks_.size(); ++b) blocks_[b] += other.blocks_[b];
  return *this;
}

Element& Element::operator-=(const Element& other) {
  require_same_shape(*this, other, "operator-");
  for (std::size_t b = 0; b < blocks_.size(); ++b) blocks_[b] -= other.blocks_[b];
  return *this;
}

Element& Element::operator*=(Complex s) {
  for (auto& m : blocks_) m *= s;
  return *this;
}

Element operator*(const Element& a, const Element& b) {
  require_same_shape(a, b, "operator*");
  std::vector<CMatrix> out;
  for (int k = 0; k < a.num_blocks(); ++k) out.push_back(a.block(k) * b.block(k));
  return Element(std::move(out));
}

double max_abs_diff(const Element& a, const Element& b) {
  require_same_shape(a, b, "max_abs_diff");
  return (a - b).max_abs();
}

Complex trace(const Element& x) {
  Complex t = 0.0;
  for (const auto& m : x.blocks()) t += m.trace();
  return t;
}

Element functional_calculus(const Element& x, const std::function<double(double)>& g) {
  if (!x.is_self_adjoint(1e-9)) throw DomainError("functional calculus needs a self-adjoint element");
  std::vector<CMatrix> out;
  for (const auto& m : x.blocks()) {
    auto es = hermitian_eigen(m);
    RVector vals = es.eigenvalues().unaryExpr(g);
    out.push_back(es.eigenvectors() * vals.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint());
  }
  return Element(std::move(out));
}

double min_eigenvalue(const Element& x) {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& m : x.blocks()) r = std::min(r, hermitian_eigen(m).eigenvalues().minCoeff());
  return r;
}

double max_eigenvalue(const Element& x) {
  double r = -std::numeric_limits<double>::infinity();
  for (const auto& m : x.blocks()) r = std::max(r, hermitian_eigen(m).eigenvalues().maxCoeff());
  return r;
}

// ---------------------------------------------------------------- Projection

Projection Projection::from_element(const Element& e, double tol) {
  if (!e.is_self_adjoint(tol)) throw DomainError("projection must be self-adjoint");
  const double defect = max_abs_diff(e * e, e);
  if (defect > tol) {
    std::ostringstream msg;
    msg << "not a projection: ||p^2 - p||_max = " << defect;
    throw DomainError(msg.str());
  }
  return Projection(e.hermitian_part());
}

Projection Projection::repaired(const Element& e) {
  if (!e.is_self_adjoint(0.1)) throw DomainError("projection repair: element far from self-adjoint");
  return Projection(functional_calculus(e.hermitian_part(), [](double v) {
    if (std::abs(v) <= 0.1) return 0.0;
    if (std::abs(v - 1.0) <= 0.1) return 1.0;
    throw DomainError("projection repair: eigenvalue " + std::to_string(v) + " is not near 0 or 1");
  }));
}

Projection Projection::zero(const Algebra& alg) { return Projection(alg.zero()); }
Projection Projection::unit(const Algebra& alg) { return Projection(alg.unit()); }

Projection Projection::complement() const {
  return Projection(element_.algebra().unit() - element_);
}

int Projection::rank() const { return static_cast<int>(std::lround(trace(element_).real())); }

// ---------------------------------------------------------------- State

State State::from_density(const Element& rho, double repair_limit) {
  double sa_defect = 0.0;
  for (const auto& m : rho.blocks()) sa_defect = std::max(sa_defect, (m - m.adjoint()).cwiseAbs().maxCoeff());
  if (sa_defect > repair_limit) throw DomainError("state density is not self-adjoint");
  Element h = rho.hermitian_part();

  const double lo = min_eigenvalue(h);
  const double tr = trace(h).real();
  if (lo < -repair_limit) {
    throw DomainError("state density has eigenvalue " + std::to_string(lo) + " below zero");
  }
  if (std::abs(tr - 1.0) > repair_limit) {
    throw DomainError("state density has trace " + std::to_string(tr) + ", expected 1");
  }
  if (lo >= -kStateTol && std::abs(tr - 1.0) <= kStateTol) return State(std::move(h));

  Element clipped = functional_calculus(h, [](double v) { return std::max(v, 0.0); });
  const double ctr = trace(clipped).real();
  return State(clipped * (1.0 / ctr));
}

State State::maximally_mixed(const Algebra& alg) {
  return State(alg.unit() * (1.0 / alg.total_dim()));
}

// ---------------------------------------------------------------- Trace

Trace::Trace(std::vector<double> block_weights) : weights_(std::move(block_weights)) {
  if (weights_.empty()) throw DomainError("trace needs at least one block weight");
  bool positive = false;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("trace weights must be finite and nonnegative");
    positive = positive || w > 0.0;
  }
  if (!positive) throw DomainError("trace needs at least one positive block weight");
}

Trace Trace::counting(const Algebra& alg) {
  return Trace(std::vector<double>(static_cast<std::size_t>(alg.num_blocks()), 1.0));
}

// ---------------------------------------------------------------- spectral calculus

std::vector<SpectralComponent> spectral_decompose(const Element& x, double tol) {
  if (!x.is_self_adjoint(1e-9)) throw DomainError("spectral_decompose: element is not self-adjoint");
  struct Eigenpair {
    double value;
    int block;
    Eigen::VectorXcd vector;
  };
  std::vector<Eigenpair> pairs;
  for (int b = 0; b < x.num_blocks(); ++b) {
    auto es = hermitian_eigen(x.block(b));
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      pairs.push_back({es.eigenvalues()(i), b, es.eigenvectors().col(i)});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Eigenpair& a, const Eigenpair& b) { return a.value < b.value; });

  const Algebra alg = x.algebra();
  std::vector<SpectralComponent> out;
  std::size_t start = 0;
  while (start < pairs.size()) {
    std::size_t end = start + 1;
    while (end < pairs.size() && pairs[end].value - pairs[end - 1].value <= tol) ++end;
    Element p = alg.zero();
    double sum = 0.0;
    std::vector<CMatrix> blocks = p.blocks();
    for (std::size_t i = start; i < end; ++i) {
      blocks[pairs[i].block] += pairs[i].vector * pairs[i].vector.adjoint();
      sum += pairs[i].value;
    }
    out.push_back({sum / static_cast<double>(end - start), Projection::from_element(Element(std::move(blocks)))});
    start = end;
  }
  return out;
}

Projection range_projection(const Element& x, double tol) {
  if (!x.is_self_adjoint(1e-9)) throw DomainError("range_projection: element is not self-adjoint");
  std::vector<CMatrix> blocks;
  for (const auto& m : x.blocks()) {
    auto es = hermitian_eigen(m);
    const auto& vals = es.eigenvalues();
    if (vals.minCoeff() < -tol) {
      throw DomainError("range_projection: element is not positive (eigenvalue " +
                        std::to_string(vals.minCoeff()) + ")");
    }
    CMatrix p = CMatrix::Zero(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
      if (vals(i) > tol) p += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    }
    blocks.push_back(std::move(p));
  }
  return Projection::from_element(Element(std::move(blocks)));
}

Projection join(const Projection& p, const Projection& q) {
  require_same_shape(p.element(), q.element(), "join");
  return range_projection(p.element() + q.element(), kEigenTol);
}

Projection meet(const Projection& p, const Projection& q) {
  return join(p.complement(), q.complement()).complement();
}

bool is_subprojection(const Projection& p, const Projection& q, double tol) {
  require_same_shape(p.element(), q.element(), "is_subprojection");
  return max_abs_diff(q.element() * p.element(), p.element()) <= tol;
}

Complex state_eval(const State& phi, const Element& b) {
  require_same_shape(phi.density(), b, "state_eval");
  Complex r = 0.0;
  for (int k = 0; k < b.num_blocks(); ++k) {
    r += (phi.density().block(k).transpose().cwiseProduct(b.block(k))).sum();
  }
  return r;
}

Projection state_support(const State& phi, double tol) { return range_projection(phi.density(), tol); }

double trace_eval(const Trace& tau, const Element& x) {
  if (static_cast<int>(tau.block_weights().size()) != x.num_blocks()) {
    throw StructuralError("trace_eval: weight count does not match block count");
  }
  if (!x.is_self_adjoint(1e-9)) throw DomainError("trace_eval: element is not self-adjoint");
  double r = 0.0;
  for (int b = 0; b < x.num_blocks(); ++b) r += tau.block_weights()[b] * x.block(b).trace().real();
  return r;
}

}  // namespace ncfractal
