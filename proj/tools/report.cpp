#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ncfractal::cli {

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write(std::ostringstream& out, const ojson& j, int level) {
  const std::string pad(static_cast<std::size_t>(2 * (level + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(2 * level), ' ');
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad << ojson(it.key()).dump() << ": ";
        write(out, it.value(), level + 1);
      }
      out << "\n" << close_pad << "}";
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      if (flat) {
        out << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i > 0) out << ", ";
          write(out, j[i], level + 1);
        }
        out << "]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) out << ",\n";
        out << pad;
        write(out, j[i], level + 1);
      }
      out << "\n" << close_pad << "]";
      return;
    }
    case ojson::value_t::number_float:
      out << format_double(j.get<double>());
      return;
    default:
      out << j.dump();
  }
}

ojson complex_json(Complex z) { return ojson::array({z.real(), z.imag()}); }

}  // namespace

std::string dump_json(const ojson& j) {
  std::ostringstream out;
  write(out, j, 0);
  out << "\n";
  return out.str();
}

ojson num(double v, double tol) { return ojson{{"value", v}, {"tol", tol}}; }

ojson num(const ExtendedReal& v, double tol) { return num(v.as_double(), tol); }

ojson checked(double v, double tol, bool pass) { return ojson{{"value", v}, {"tol", tol}, {"pass", pass}}; }

ojson checked(const ExtendedReal& v, double tol, bool pass) { return checked(v.as_double(), tol, pass); }

ojson element_json(const Element& x) {
  ojson blocks = ojson::array();
  for (const auto& m : x.blocks()) {
    ojson rows = ojson::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      ojson row = ojson::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
      rows.push_back(std::move(row));
    }
    blocks.push_back(std::move(rows));
  }
  return ojson{{"blocks", std::move(blocks)}};
}

ojson projection_json(const Projection& p) {
  ojson blocks = ojson::array();
  for (const auto& m : p.element().blocks()) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
    ojson spectrum = ojson::array();
    ojson basis = ojson::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      spectrum.push_back(es.eigenvalues()(i) > 0.5 ? 1 : 0);
      ojson col = ojson::array();
      for (Eigen::Index r = 0; r < m.rows(); ++r) col.push_back(complex_json(es.eigenvectors()(r, i)));
      basis.push_back(std::move(col));
    }
    blocks.push_back(ojson{{"spectrum", std::move(spectrum)}, {"eigenbasis", std::move(basis)}});
  }
  return ojson{{"rank", p.rank()}, {"blocks", std::move(blocks)}};
}

ojson matrix_json(const RMatrix& m) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ojson row = ojson::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ncfractal::cli
