#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace ncfractal::cli {

namespace {

using json = nlohmann::json;

/// JSON value together with its key path, for error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const json& raw() const { return *j_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const { throw SchemaError(path_, what); }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

  Node at(const std::string& key) const {
    if (!j_->is_object()) fail("expected an object");
    if (!j_->contains(key)) throw SchemaError(child_path(key), "required key is missing");
    return Node((*j_)[key], child_path(key));
  }

  std::optional<Node> opt(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return at(key);
  }

  std::size_t size() const {
    if (!j_->is_array()) fail("expected an array");
    return j_->size();
  }

  Node operator[](std::size_t i) const {
    if (!j_->is_array()) fail("expected an array");
    return Node((*j_)[i], path_ + "[" + std::to_string(i) + "]");
  }

  std::vector<std::pair<std::string, Node>> items() const {
    if (!j_->is_object()) fail("expected an object");
    std::vector<std::pair<std::string, Node>> out;
    for (auto it = j_->begin(); it != j_->end(); ++it) out.emplace_back(it.key(), Node(it.value(), child_path(it.key())));
    return out;
  }

  double number() const {
    if (!j_->is_number()) fail("expected a number");
    return j_->get<double>();
  }

  /// Number, or the string "inf".
  double extended() const {
    if (j_->is_string() && j_->get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    if (!j_->is_number()) fail("expected a number or \"inf\"");
    return j_->get<double>();
  }

  std::int64_t integer() const {
    if (!j_->is_number_integer()) fail("expected an integer");
    return j_->get<std::int64_t>();
  }

  std::string str() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }

  bool is_array() const { return j_->is_array(); }
  bool is_object() const { return j_->is_object(); }

 private:
  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* j_;
  std::string path_;
};

Complex parse_complex(const Node& n) {
  if (n.raw().is_number()) return {n.number(), 0.0};
  if (n.is_array() && n.size() == 2) return {n[0].number(), n[1].number()};
  n.fail("expected a number or an [re, im] pair");
}

CMatrix parse_cmatrix(const Node& n) {
  const std::size_t rows = n.size();
  if (rows == 0) n.fail("matrix has no rows");
  const std::size_t cols = n[0].size();
  CMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const Node row = n[r];
    if (row.size() != cols) row.fail("ragged matrix: expected " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = parse_complex(row[c]);
  }
  return m;
}

RMatrix parse_rmatrix(const Node& n, bool allow_inf) {
  const std::size_t rows = n.size();
  if (rows == 0) n.fail("matrix has no rows");
  const std::size_t cols = n[0].size();
  RMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const Node row = n[r];
    if (row.size() != cols) row.fail("ragged matrix: expected " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = allow_inf ? row[c].extended() : row[c].number();
  }
  return m;
}

std::vector<double> parse_reals(const Node& n) {
  std::vector<double> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(n[i].number());
  return out;
}

Element parse_element(const Node& n, const Algebra& alg) {
  const Node blocks = n.at("blocks");
  if (static_cast<int>(blocks.size()) != alg.num_blocks()) {
    blocks.fail("expected " + std::to_string(alg.num_blocks()) + " blocks");
  }
  std::vector<CMatrix> out;
  for (int b = 0; b < alg.num_blocks(); ++b) {
    CMatrix m = parse_cmatrix(blocks[b]);
    if (m.rows() != alg.block_dim(b) || m.cols() != alg.block_dim(b)) {
      blocks[b].fail("expected a " + std::to_string(alg.block_dim(b)) + "x" + std::to_string(alg.block_dim(b)) +
                     " block");
    }
    out.push_back(std::move(m));
  }
  return Element(std::move(out));
}

template <typename Fn>
auto validated(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ncfractal::Error& e) {
    throw ValidationError(path, e.what());
  }
}

FiniteMetricSpace parse_space(const Node& n) {
  if (n.has("d")) {
    RMatrix d = parse_rmatrix(n.at("d"), true);
    if (d.rows() != d.cols()) n.at("d").fail("distance matrix must be square");
    return validated(n.path() + ".d", [&] { return FiniteMetricSpace(d); });
  }
  if (n.has("shift_depth")) {
    const auto depth = n.at("shift_depth").integer();
    if (depth < 1 || depth > 12) n.at("shift_depth").fail("depth must be in 1..12");
    return FiniteMetricSpace::shift_space(static_cast<int>(depth));
  }
  if (n.has("discrete")) {
    const auto k = n.at("discrete").integer();
    if (k < 1) n.at("discrete").fail("need at least one point");
    return FiniteMetricSpace::discrete(static_cast<int>(k));
  }
  n.fail("space needs one of \"d\", \"shift_depth\" or \"discrete\"");
}

Seminorm parse_seminorm(const Node& n, const Algebra& alg, const std::optional<FiniteMetricSpace>& space) {
  const std::string type = n.at("type").str();
  if (type == "metric") {
    RMatrix d;
    if (n.has("d")) {
      d = parse_rmatrix(n.at("d"), true);
    } else if (space) {
      d = space->d();
    } else {
      n.fail("metric seminorm needs \"d\" or a top-level \"space\"");
    }
    if (d.rows() != alg.real_dim() || !alg.is_diagonal()) {
      n.fail("metric seminorm needs a diagonal algebra with one point per distance row");
    }
    return validated(n.path(), [&] { return Seminorm::metric(d); });
  }
  if (type == "euclidean") {
    RMatrix delta = parse_rmatrix(n.at("delta"), false);
    if (delta.cols() != alg.real_dim()) n.at("delta").fail("expected " + std::to_string(alg.real_dim()) + " columns");
    return validated(n.path(), [&] { return Seminorm::euclidean(alg, delta); });
  }
  if (type == "traceless") {
    std::vector<double> w;
    if (auto wn = n.opt("weights")) {
      w = parse_reals(*wn);
      if (static_cast<int>(w.size()) != alg.real_dim()) {
        wn->fail("expected " + std::to_string(alg.real_dim()) + " weights");
      }
    }
    return validated(n.path(), [&] { return Seminorm::traceless(alg, w); });
  }
  if (type == "commutator") {
    const Element d = parse_element(n.at("D"), alg);
    return validated(n.path(), [&] { return Seminorm::commutator(d); });
  }
  n.at("type").fail("unknown seminorm type \"" + type + "\" (metric, euclidean, traceless, commutator)");
}

StarHom parse_hom(const Node& n, const Algebra& alg) {
  const std::string type = n.at("type").str();
  if (type == "identity") return StarHom::identity(alg);
  if (type == "point_map") {
    const Node m = n.has("g") ? n.at("g") : n.at("map");
    std::vector<int> g;
    for (std::size_t i = 0; i < m.size(); ++i) g.push_back(static_cast<int>(m[i].integer()));
    if (!alg.is_diagonal() || static_cast<int>(g.size()) != alg.real_dim()) {
      m.fail("point map needs one entry per point of a diagonal algebra");
    }
    return validated(m.path(), [&] { return hom_from_point_map(g); });
  }
  if (type == "unitary") {
    const Element u = parse_element(n.at("u"), alg);
    return validated(n.path() + ".u", [&] { return hom_from_unitary(u); });
  }
  if (type == "pattern") {
    const Node t = n.at("targets");
    std::vector<std::vector<PatternEntry>> targets;
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::vector<PatternEntry> row;
      for (std::size_t j = 0; j < t[i].size(); ++j) {
        const Node e = t[i][j];
        if (e.size() != 2) e.fail("expected [source_block, multiplicity]");
        row.push_back({static_cast<int>(e[0].integer()), static_cast<int>(e[1].integer())});
      }
      targets.push_back(std::move(row));
    }
    std::optional<Element> twist;
    if (auto tw = n.has("u") ? n.opt("u") : n.opt("twist")) twist = parse_element(*tw, alg);
    return validated(n.path(), [&] { return hom_from_pattern(alg, targets, twist); });
  }
  n.at("type").fail("unknown morphism type \"" + type + "\" (identity, point_map, unitary, pattern)");
}

State parse_state(const Node& n, const Algebra& alg) {
  if (n.has("diag")) {
    const std::vector<double> d = parse_reals(n.at("diag"));
    if (static_cast<int>(d.size()) != alg.total_dim()) {
      n.at("diag").fail("expected " + std::to_string(alg.total_dim()) + " entries");
    }
    return validated(n.path(), [&] { return State::from_density(Element::diagonal(alg, d)); });
  }
  if (n.has("density")) {
    const Element rho = parse_element(n.at("density"), alg);
    return validated(n.path(), [&] { return State::from_density(rho); });
  }
  if (n.has("dirac")) {
    const auto x = n.at("dirac").integer();
    if (x < 0 || x >= alg.total_dim()) n.at("dirac").fail("index out of range");
    std::vector<double> d(static_cast<std::size_t>(alg.total_dim()), 0.0);
    d[static_cast<std::size_t>(x)] = 1.0;
    return State::from_density(Element::diagonal(alg, d));
  }
  if (n.has("maximally_mixed")) return State::maximally_mixed(alg);
  n.fail("state needs one of \"diag\", \"density\", \"dirac\" or \"maximally_mixed\"");
}

Weights parse_weights(const Node& n, int k) {
  const std::vector<double> w = parse_reals(n);
  if (static_cast<int>(w.size()) != k) n.fail("expected " + std::to_string(k) + " weights, one per morphism");
  try {
    return Weights(w);
  } catch (const ncfractal::Error& e) {
    n.fail(e.what());
  }
}

}  // namespace

const State* Scenario::find_state(const std::string& n) const {
  for (const auto& [key, s] : states) {
    if (key == n) return &s;
  }
  return nullptr;
}

const Element* Scenario::find_bump(const std::string& n) const {
  for (const auto& [key, b] : bumps) {
    if (key == n) return &b;
  }
  return nullptr;
}

Scenario parse_scenario(const std::string& text, const std::string& name_hint) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << "parse error at byte offset " << e.byte << ": " << e.what();
    throw ParseError(msg.str(), e.byte);
  }
  const Node root(doc, "");
  if (!root.is_object()) root.fail("top level must be an object");

  const std::string name = root.has("name") ? root.at("name").str() : name_hint;

  std::optional<FiniteMetricSpace> space;
  if (auto s = root.opt("space")) space = parse_space(*s);

  std::optional<Algebra> alg;
  if (auto a = root.opt("algebra")) {
    const Node blocks = a->at("blocks");
    std::vector<int> dims;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto d = blocks[i].integer();
      if (d < 1) blocks[i].fail("block dimensions must be positive");
      dims.push_back(static_cast<int>(d));
    }
    if (dims.empty()) blocks.fail("need at least one block");
    alg.emplace(dims);
  }
  if (space) {
    const Algebra lifted = Algebra::diagonal(space->n_points());
    if (alg && !(*alg == lifted)) root.at("algebra").fail("does not match the diagonal lift of \"space\"");
    alg = lifted;
  }
  if (!alg) root.fail("need \"algebra\" or \"space\"");

  std::optional<Seminorm> seminorm;
  if (auto s = root.opt("seminorm")) {
    seminorm = parse_seminorm(*s, *alg, space);
  } else if (space) {
    seminorm = Seminorm::metric(space->d());
  }

  std::vector<StarHom> homs;
  std::vector<std::string> names;
  std::vector<PointMap> point_maps;
  if (auto m = root.opt("maps")) {
    if (!space) m->fail("point maps need a top-level \"space\"");
    for (std::size_t i = 0; i < m->size(); ++i) {
      const Node row = (*m)[i];
      std::vector<int> g;
      for (std::size_t j = 0; j < row.size(); ++j) g.push_back(static_cast<int>(row[j].integer()));
      PointMap pm = validated(row.path(), [&] { return make_point_map(g, space->n_points()); });
      homs.push_back(lift_map(pm));
      names.push_back("g" + std::to_string(i));
      point_maps.push_back(std::move(pm));
    }
  }
  if (auto h = root.opt("homs")) {
    if (!point_maps.empty()) h->fail("give either \"maps\" or \"homs\", not both");
    for (std::size_t i = 0; i < h->size(); ++i) {
      const Node hn = (*h)[i];
      homs.push_back(parse_hom(hn, *alg));
      names.push_back(hn.has("name") ? hn.at("name").str() : "f" + std::to_string(i));
      const HomReport rep = validate_hom(homs.back());
      if (!rep.pass) {
        std::ostringstream msg;
        msg << "not a unital *-homomorphism (multiplicativity " << rep.multiplicativity << ", adjoint "
            << rep.adjoint << ", unitality " << rep.unitality << ", tol " << rep.tol << ")";
        throw ValidationError(hn.path(), msg.str());
      }
    }
  }
  if (homs.empty()) root.fail("need a nonempty \"homs\" or \"maps\" list");
  const int k = static_cast<int>(homs.size());

  std::vector<Weights> weights;
  if (auto w = root.opt("weights")) {
    if (w->size() > 0 && (*w)[0].is_array()) {
      for (std::size_t i = 0; i < w->size(); ++i) weights.push_back(parse_weights((*w)[i], k));
    } else {
      weights.push_back(parse_weights(*w, k));
    }
  } else {
    weights.push_back(Weights::uniform(k));
  }

  std::vector<std::pair<std::string, State>> states;
  if (auto s = root.opt("states")) {
    for (const auto& [key, node] : s->items()) states.emplace_back(key, parse_state(node, *alg));
  }

  std::optional<Trace> trace;
  if (auto t = root.opt("trace")) {
    const std::vector<double> w = parse_reals(*t);
    if (static_cast<int>(w.size()) != alg->num_blocks()) t->fail("expected one weight per block");
    trace = validated(t->path(), [&] { return Trace(w); });
  }

  std::vector<std::pair<std::string, Element>> bumps;
  if (auto b = root.opt("bumps")) {
    for (const auto& [key, node] : b->items()) bumps.emplace_back(key, parse_element(node, *alg));
  }

  double tol = 1e-8;
  if (auto t = root.opt("tol")) {
    tol = t->number();
    if (!(tol > 0.0)) t->fail("tolerance must be positive");
  }
  std::uint64_t budget = 4096;
  if (auto b = root.opt("budget")) {
    const auto v = b->integer();
    if (v < 1) b->fail("budget must be positive");
    budget = static_cast<std::uint64_t>(v);
  }
  int depth = 6;
  if (auto d = root.opt("codespace_depth")) {
    const auto v = d->integer();
    if (v < 1) d->fail("depth must be positive");
    depth = static_cast<int>(v);
  }

  DualIFS ifs(std::move(homs), std::move(names));
  return Scenario{name,          {},        *alg,     std::move(seminorm), std::move(space), std::move(point_maps),
                  std::move(ifs), std::move(weights), std::move(states), std::move(trace), std::move(bumps), tol,
                  budget,        depth};
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str(), path.stem().string());
  s.path = path;
  return s;
}

}  // namespace ncfractal::cli
