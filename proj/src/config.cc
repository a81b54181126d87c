#include "qpathnet/config.h"

#include <cmath>

#include <fmt/format.h>

#include "qpathnet/errors.h"
#include "qpathnet/io.h"
#include "qpathnet/scenarios.h"

namespace qpathnet {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(fmt::format("{} must be an object", where.empty() ? "document" : where));
  const auto it = obj.find(key);
  if (it == obj.end()) fail(fmt::format("missing field {}", where.empty() ? key : where + "." + key));
  return *it;
}

const json* optional_field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double as_real(const json& j, const std::string& where) {
  if (!j.is_number()) fail(fmt::format("{} must be a number", where));
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(fmt::format("{} must be finite", where));
  return v;
}

std::size_t as_index(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(fmt::format("{} must be a non-negative integer", where));
  return j.get<std::size_t>();
}

Complex as_complex(const json& j, const std::string& where) {
  if (j.is_number()) return {as_real(j, where), 0.0};
  if (j.is_array() && j.size() == 2) return {as_real(j[0], where + "[0]"), as_real(j[1], where + "[1]")};
  fail(fmt::format("{} must be a number or an [re, im] pair", where));
}

CVector as_cvector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(fmt::format("{} must be a non-empty array", where));
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = as_complex(j[i], fmt::format("{}[{}]", where, i));
  return v;
}

std::vector<double> as_reals(const json& j, const std::string& where) {
  if (!j.is_array()) fail(fmt::format("{} must be an array", where));
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_real(j[i], fmt::format("{}[{}]", where, i)));
  return v;
}

// Rows of complex entries; with `columns` the inner arrays are columns.
CMatrix as_cmatrix(const json& j, std::size_t dim, const std::string& where, bool columns = false) {
  if (!j.is_array() || j.size() != dim) fail(fmt::format("{} must have {} entries", where, dim));
  CMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < dim; ++r) {
    const std::string row_where = fmt::format("{}[{}]", where, r);
    const CVector row = as_cvector(j[r], row_where);
    if (static_cast<std::size_t>(row.size()) != dim) fail(fmt::format("{} must have {} entries", row_where, dim));
    if (columns) {
      m.col(static_cast<Eigen::Index>(r)) = row;
    } else {
      m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
  }
  return m;
}

StateVector as_state(const json& j, std::size_t dim, const std::string& where) {
  CVector v = as_cvector(j, where);
  if (static_cast<std::size_t>(v.size()) != dim) {
    fail(fmt::format("{} has dimension {}, expected {}", where, v.size(), dim));
  }
  if (!(v.squaredNorm() > 0.0)) fail(fmt::format("{} is the zero vector", where));
  // Already-normalized input is kept bit-for-bit.
  if (std::abs(v.squaredNorm() - 1.0) <= kConstructionTol) return StateVector(v);
  return StateVector::normalized(v);
}

json complex_json(Complex c) { return json::array({c.real(), c.imag()}); }

json vector_json(const CVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

json matrix_rows_json(const CMatrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

PathFunctional parse_functional(const json& j, const std::string& where) {
  const json& kind_j = require(j, "kind", where);
  if (!kind_j.is_string()) fail(fmt::format("{}.kind must be a string", where));
  const std::string kind = kind_j.get<std::string>();
  if (kind == "eigenvalue") return PathFunctional::eigenvalue_at_step(as_index(require(j, "step", where), where + ".step"));
  if (kind == "constant") return PathFunctional::constant(as_real(require(j, "value", where), where + ".value"));
  if (kind == "linear") {
    const json& terms_j = require(j, "terms", where);
    if (!terms_j.is_array()) fail(fmt::format("{}.terms must be an array", where));
    std::vector<StepWeight> terms;
    for (std::size_t i = 0; i < terms_j.size(); ++i) {
      const std::string tw = fmt::format("{}.terms[{}]", where, i);
      terms.push_back({as_index(require(terms_j[i], "step", tw), tw + ".step"),
                       as_real(require(terms_j[i], "weight", tw), tw + ".weight")});
    }
    double offset = 0.0;
    if (const json* o = optional_field(j, "offset")) offset = as_real(*o, where + ".offset");
    return PathFunctional::linear_combination(std::move(terms), offset);
  }
  if (kind == "indicator") {
    const json& path_j = require(j, "path", where);
    if (!path_j.is_array()) fail(fmt::format("{}.path must be an array", where));
    VirtualPath path;
    for (std::size_t i = 0; i < path_j.size(); ++i) path.indices.push_back(as_index(path_j[i], fmt::format("{}.path[{}]", where, i)));
    return PathFunctional::indicator_of_path(std::move(path));
  }
  if (kind == "table") return PathFunctional::table(as_reals(require(j, "values", where), where + ".values"));
  fail(fmt::format("{}.kind '{}' is not one of eigenvalue, constant, linear, indicator, table", where, kind));
}

json functional_json(const std::string& name, const PathFunctional& f) {
  switch (f.kind()) {
    case PathFunctional::Kind::kLinear: {
      json terms = json::array();
      for (const auto& t : f.terms()) terms.push_back({{"step", t.step}, {"weight", t.weight}});
      return {{"name", name}, {"kind", "linear"}, {"terms", terms}, {"offset", f.offset()}};
    }
    case PathFunctional::Kind::kIndicator:
      return {{"name", name}, {"kind", "indicator"}, {"path", f.indicated_path().indices}};
    case PathFunctional::Kind::kTable:
      return {{"name", name}, {"kind", "table"}, {"values", f.table_values()}};
  }
  return {};
}

PointerProfile parse_profile(const json& j, const std::string& where) {
  const json& shape_j = require(j, "shape", where);
  if (!shape_j.is_string()) fail(fmt::format("{}.shape must be a string", where));
  const std::string shape = shape_j.get<std::string>();
  const double width = as_real(require(j, "width", where), where + ".width");
  if (!(width > 0.0)) fail(fmt::format("{}.width must be positive", where));
  try {
    if (shape == "gaussian") return PointerProfile::gaussian(width);
    if (shape == "rectangular") return PointerProfile::rectangular(width);
    if (shape == "tabulated") {
      return PointerProfile::tabulated(as_reals(require(j, "x", where), where + ".x"),
                                       as_reals(require(j, "g", where), where + ".g"), width);
    }
  } catch (const Error& e) {
    fail(fmt::format("{}: {}", where, e.what()));
  }
  fail(fmt::format("{}.shape '{}' is not one of gaussian, rectangular, tabulated", where, shape));
}

json profile_json(const PointerProfile& p) {
  json out = {{"shape", to_string(p.shape())}, {"width", p.width()}};
  if (p.shape() == ProfileShape::kTabulated) {
    out["x"] = p.table_x();
    out["g"] = p.table_g();
  }
  return out;
}

std::array<std::array<double, 2>, 2> parse_w(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) fail(fmt::format("{} must be a 2x2 array", where));
  std::array<std::array<double, 2>, 2> w{};
  for (std::size_t o = 0; o < 2; ++o) {
    const std::string rw = fmt::format("{}[{}]", where, o);
    if (!j[o].is_array() || j[o].size() != 2) fail(fmt::format("{} must have 2 entries", rw));
    for (std::size_t i = 0; i < 2; ++i) w[o][i] = as_real(j[o][i], fmt::format("{}[{}]", rw, i));
  }
  return w;
}

Outlet parse_outlet(const json& j, const std::string& where) {
  if (const json* c = optional_field(j, "connector")) {
    if (!c->is_string()) fail(fmt::format("{}.connector must be a string", where));
    std::size_t inlet = 0;
    if (const json* i = optional_field(j, "inlet")) inlet = as_index(*i, where + ".inlet");
    return Outlet::to_connector(c->get<std::string>(), inlet);
  }
  if (const json* r = optional_field(j, "receptacle")) {
    if (!r->is_string()) fail(fmt::format("{}.receptacle must be a string", where));
    return Outlet::to_receptacle(r->get<std::string>());
  }
  if (const json* b = optional_field(j, "blocked"); b && b->is_boolean() && b->get<bool>()) return Outlet::blocked();
  fail(fmt::format("{} needs one of connector, receptacle or blocked", where));
}

json outlet_json(const Outlet& o) {
  switch (o.kind) {
    case Outlet::Kind::kConnector:
      return {{"connector", o.target}, {"inlet", o.inlet}};
    case Outlet::Kind::kReceptacle:
      return {{"receptacle", o.target}};
    case Outlet::Kind::kBlocked:
      return {{"blocked", true}};
  }
  return {};
}

ClassicalSettings parse_classical(const json& j) {
  const std::string where = "classical";
  const json& conns = require(j, "connectors", where);
  if (!conns.is_array() || conns.empty()) fail("classical.connectors must be a non-empty array");
  std::vector<ClassicalConnector> connectors;
  for (std::size_t k = 0; k < conns.size(); ++k) {
    const std::string cw = fmt::format("classical.connectors[{}]", k);
    ClassicalConnector c;
    const json& label = require(conns[k], "label", cw);
    if (!label.is_string()) fail(cw + ".label must be a string");
    c.label = label.get<std::string>();
    c.w = parse_w(require(conns[k], "w", cw), cw + ".w");
    if (const json* v = optional_field(conns[k], "value")) c.value = as_real(*v, cw + ".value");
    const json& outs = require(conns[k], "outlets", cw);
    if (!outs.is_array() || outs.size() != 2) fail(cw + ".outlets must have 2 entries");
    for (std::size_t o = 0; o < 2; ++o) c.outlets[o] = parse_outlet(outs[o], fmt::format("{}.outlets[{}]", cw, o));
    connectors.push_back(std::move(c));
  }
  const json& entry = require(j, "entry", where);
  if (!entry.is_string()) fail("classical.entry must be a string");
  std::size_t entry_inlet = 0;
  if (const json* e = optional_field(j, "entry_inlet")) entry_inlet = as_index(*e, "classical.entry_inlet");

  std::vector<std::pair<std::size_t, double>> weights;
  if (const json* f = optional_field(j, "functional")) {
    const json& dw = require(*f, "depth_weights", "classical.functional");
    if (!dw.is_array()) fail("classical.functional.depth_weights must be an array");
    for (std::size_t i = 0; i < dw.size(); ++i) {
      const std::string w = fmt::format("classical.functional.depth_weights[{}]", i);
      weights.emplace_back(as_index(require(dw[i], "depth", w), w + ".depth"),
                           as_real(require(dw[i], "weight", w), w + ".weight"));
    }
  }
  std::vector<std::string> condition;
  if (const json* c = optional_field(j, "condition")) {
    if (!c->is_array()) fail("classical.condition must be an array of receptacle labels");
    for (const auto& r : *c) {
      if (!r.is_string()) fail("classical.condition must be an array of receptacle labels");
      condition.push_back(r.get<std::string>());
    }
  }
  try {
    return {ClassicalNetwork(std::move(connectors), entry.get<std::string>(), entry_inlet), std::move(weights),
            std::move(condition)};
  } catch (const Error& e) {
    fail(fmt::format("classical: {}", e.what()));
  }
}

json classical_json(const ClassicalSettings& c) {
  json conns = json::array();
  for (const auto& k : c.network.connectors()) {
    conns.push_back({{"label", k.label},
                     {"w", {{k.w[0][0], k.w[0][1]}, {k.w[1][0], k.w[1][1]}}},
                     {"value", k.value},
                     {"outlets", {outlet_json(k.outlets[0]), outlet_json(k.outlets[1])}}});
  }
  json weights = json::array();
  for (const auto& [d, w] : c.depth_weights) weights.push_back({{"depth", d}, {"weight", w}});
  return {{"entry", c.network.entry()},
          {"entry_inlet", c.network.entry_inlet()},
          {"connectors", conns},
          {"functional", {{"depth_weights", weights}}},
          {"condition", c.condition}};
}

}  // namespace

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kExact:
      return "exact";
    case RunMode::kSweep:
      return "sweep";
    case RunMode::kSample:
      return "sample";
    case RunMode::kClassical:
      return "classical";
  }
  return "exact";
}

RunMode parse_run_mode(const std::string& text) {
  if (text == "exact") return RunMode::kExact;
  if (text == "sweep") return RunMode::kSweep;
  if (text == "sample") return RunMode::kSample;
  if (text == "classical") return RunMode::kClassical;
  fail(fmt::format("run.mode '{}' is not one of exact, sweep, sample, classical", text));
}

ScenarioConfig parse_config(const json& doc) {
  if (!doc.is_object()) fail("scenario document must be a JSON object");

  std::string name = "scenario";
  if (const json* n = optional_field(doc, "name")) {
    if (!n->is_string()) fail("name must be a string");
    name = n->get<std::string>();
  }

  const json& pre_j = require(doc, "pre_state", "");
  std::size_t dim = pre_j.is_array() ? pre_j.size() : 0;
  const json* system = optional_field(doc, "system");
  if (system) {
    if (const json* d = optional_field(*system, "dim")) dim = as_index(*d, "system.dim");
  }
  if (dim < 2) fail("system.dim must be at least 2");

  const StateVector pre = as_state(pre_j, dim, "pre_state");
  const StateVector post = as_state(require(doc, "post_state", ""), dim, "post_state");

  Propagator prop = Propagator::zero(dim);
  if (system) {
    if (const json* h = optional_field(*system, "hamiltonian")) {
      const CMatrix hm = as_cmatrix(*h, dim, "system.hamiltonian");
      if (!is_hermitian(hm)) fail("hamiltonian not Hermitian at system.hamiltonian");
      if (!hm.isZero(0.0)) prop = Propagator(hm);
    }
  }

  std::optional<std::vector<StateVector>> complement;
  if (const json* c = optional_field(doc, "post_complement")) {
    if (!c->is_array()) fail("post_complement must be an array of states");
    complement.emplace();
    for (std::size_t i = 0; i < c->size(); ++i) complement->push_back(as_state((*c)[i], dim, fmt::format("post_complement[{}]", i)));
  }

  const double final_time = as_real(require(doc, "final_time", ""), "final_time");

  const json& steps_j = require(doc, "steps", "");
  if (!steps_j.is_array() || steps_j.empty()) fail("steps must be a non-empty array");
  std::vector<ChainStep> steps;
  for (std::size_t k = 0; k < steps_j.size(); ++k) {
    const std::string where = fmt::format("steps[{}]", k);
    const json& s = steps_j[k];
    const double time = as_real(require(s, "time", where), where + ".time");
    if (const json* m = optional_field(s, "matrix")) {
      const CMatrix mat = as_cmatrix(*m, dim, where + ".matrix");
      if (!is_hermitian(mat)) fail(fmt::format("observable not Hermitian at {}", where));
      steps.push_back({time, Observable::from_matrix(mat)});
    } else if (const json* b = optional_field(s, "basis")) {
      const CMatrix basis = as_cmatrix(*b, dim, where + ".basis", true);
      const std::vector<double> ev = as_reals(require(s, "eigenvalues", where), where + ".eigenvalues");
      if (ev.size() != dim) fail(fmt::format("{}.eigenvalues must have {} entries", where, dim));
      if (!is_unitary(basis)) fail(fmt::format("eigenbasis not orthonormal at {}", where));
      steps.push_back({time, Observable::from_basis(basis, Eigen::Map<const RVector>(ev.data(), static_cast<Eigen::Index>(dim)))});
    } else {
      fail(fmt::format("{} needs either matrix or basis + eigenvalues", where));
    }
    if (k > 0 && !(time > steps[k - 1].time)) fail(fmt::format("{}.time must exceed steps[{}].time", where, k - 1));
  }
  if (!(steps.front().time > 0.0)) fail("steps[0].time must be positive");
  if (!(final_time > steps.back().time)) fail("final_time must exceed the last step time");

  std::optional<MeasurementChain> chain;
  try {
    chain.emplace(pre, std::move(steps), prop, final_time, post, std::move(complement));
  } catch (const Error& e) {
    fail(fmt::format("chain: {}", e.what()));
  }

  std::vector<NamedFunctional> functionals;
  if (const json* fs = optional_field(doc, "functionals")) {
    if (!fs->is_array()) fail("functionals must be an array");
    for (std::size_t i = 0; i < fs->size(); ++i) {
      const std::string where = fmt::format("functionals[{}]", i);
      const json& n = require((*fs)[i], "name", where);
      if (!n.is_string()) fail(where + ".name must be a string");
      for (const auto& existing : functionals) {
        if (existing.name == n.get<std::string>()) fail(fmt::format("{}.name '{}' is already used", where, existing.name));
      }
      PathFunctional f = parse_functional((*fs)[i], where);
      try {
        f.validate(*chain);
      } catch (const Error& e) {
        fail(fmt::format("{}: {}", where, e.what()));
      }
      functionals.push_back({n.get<std::string>(), std::move(f)});
    }
  }

  std::vector<std::string> meter_functionals;
  std::vector<MeterSpec> meters;
  const json& meters_j = require(doc, "meters", "");
  if (!meters_j.is_array() || meters_j.empty()) fail("meters must be a non-empty array");
  for (std::size_t i = 0; i < meters_j.size(); ++i) {
    const std::string where = fmt::format("meters[{}]", i);
    const json& fn = require(meters_j[i], "functional", where);
    if (!fn.is_string()) fail(where + ".functional must name an entry of functionals");
    const NamedFunctional* found = nullptr;
    for (const auto& f : functionals) {
      if (f.name == fn.get<std::string>()) found = &f;
    }
    if (!found) fail(fmt::format("{}.functional '{}' is not defined in functionals", where, fn.get<std::string>()));
    meter_functionals.push_back(found->name);
    meters.push_back({found->functional, parse_profile(require(meters_j[i], "profile", where), where + ".profile")});
  }

  RunSettings run;
  if (const json* r = optional_field(doc, "run")) {
    if (!r->is_object()) fail("run must be an object");
    if (const json* m = optional_field(*r, "mode")) {
      if (!m->is_string()) fail("run.mode must be a string");
      run.mode = parse_run_mode(m->get<std::string>());
    }
    if (const json* g = optional_field(*r, "grid")) {
      if (const json* s = optional_field(*g, "step")) {
        run.grid.step = as_real(*s, "run.grid.step");
        if (!(*run.grid.step > 0.0)) fail("run.grid.step must be positive");
      }
      if (const json* e = optional_field(*g, "extent")) {
        run.grid.extent = as_real(*e, "run.grid.extent");
        if (!(*run.grid.extent >= 0.0)) fail("run.grid.extent must be non-negative");
      }
    }
    if (const json* t = optional_field(*r, "trials")) {
      run.trials = as_index(*t, "run.trials");
      if (run.trials == 0) fail("run.trials must be at least 1");
    }
    if (const json* s = optional_field(*r, "seed")) {
      if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0)) {
        fail("run.seed must be a non-negative integer");
      }
      run.seed = s->get<std::uint64_t>();
    }
    if (const json* w = optional_field(*r, "widths")) {
      run.widths = as_reals(*w, "run.widths");
      for (std::size_t i = 0; i < run.widths.size(); ++i) {
        if (!(run.widths[i] > 0.0)) fail(fmt::format("run.widths[{}] must be positive", i));
        if (i > 0 && !(run.widths[i] > run.widths[i - 1])) fail("run.widths must be strictly increasing");
      }
    }
  }

  std::optional<ClassicalSettings> classical;
  if (const json* c = optional_field(doc, "classical")) classical = parse_classical(*c);

  return {std::move(name),  std::move(*chain), std::move(functionals), std::move(meter_functionals),
          std::move(meters), std::move(run),    std::move(classical)};
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = read_json_file(path);
  } catch (const json::exception& e) {
    fail(fmt::format("{}: not valid JSON ({})", path.string(), e.what()));
  } catch (const Error& e) {
    fail(e.what());
  }
  return parse_config(doc);
}

json to_json(const ScenarioConfig& config) {
  const auto& chain = config.chain;
  json doc;
  doc["name"] = config.name;
  json system = {{"dim", chain.dim()}};
  if (!chain.propagator().is_zero()) system["hamiltonian"] = matrix_rows_json(chain.propagator().hamiltonian());
  doc["system"] = system;
  doc["pre_state"] = vector_json(chain.pre_state().amplitudes());
  doc["post_state"] = vector_json(chain.post_state().amplitudes());
  if (chain.has_explicit_completion()) {
    json comp = json::array();
    for (const auto& s : chain.completion()) comp.push_back(vector_json(s.amplitudes()));
    doc["post_complement"] = comp;
  }
  doc["final_time"] = chain.final_time();
  json steps = json::array();
  for (const auto& s : chain.steps()) {
    const auto& obs = s.observable;
    json basis = json::array();
    for (std::size_t i = 0; i < obs.dim(); ++i) basis.push_back(vector_json(obs.eigenvector(i)));
    steps.push_back({{"time", s.time}, {"basis", basis}, {"eigenvalues", std::vector<double>(obs.eigenvalues().begin(), obs.eigenvalues().end())}});
  }
  doc["steps"] = steps;
  json functionals = json::array();
  for (const auto& f : config.functionals) functionals.push_back(functional_json(f.name, f.functional));
  doc["functionals"] = functionals;
  json meters = json::array();
  for (std::size_t i = 0; i < config.meters.size(); ++i) {
    meters.push_back({{"functional", config.meter_functionals[i]}, {"profile", profile_json(config.meters[i].profile)}});
  }
  doc["meters"] = meters;
  json run = {{"mode", to_string(config.run.mode)}, {"trials", config.run.trials}, {"seed", config.run.seed}};
  json grid = json::object();
  if (config.run.grid.step) grid["step"] = *config.run.grid.step;
  if (config.run.grid.extent) grid["extent"] = *config.run.grid.extent;
  if (!grid.empty()) run["grid"] = grid;
  if (!config.run.widths.empty()) run["widths"] = config.run.widths;
  doc["run"] = run;
  if (config.classical) doc["classical"] = classical_json(*config.classical);
  return doc;
}

ScenarioConfig config_from_preset(const ScenarioPreset& preset) {
  std::vector<NamedFunctional> functionals;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < preset.meters.size(); ++i) {
    names.push_back(fmt::format("F{}", i + 1));
    functionals.push_back({names.back(), preset.meters[i].functional});
  }
  RunSettings run;
  run.trials = preset.trials;
  run.seed = preset.seed;
  run.widths = preset.widths;
  return {preset.name, preset.chain, std::move(functionals), std::move(names), preset.meters, std::move(run),
          std::nullopt};
}

ScenarioConfig resolve_config(const std::string& source) {
  constexpr std::string_view prefix = "preset:";
  if (source.rfind(prefix, 0) == 0) {
    const std::string name = source.substr(prefix.size());
    try {
      return config_from_preset(preset_by_name(name));
    } catch (const InvalidArgument& e) {
      fail(e.what());
    }
  }
  return load_config(source);
}

}  // namespace qpathnet
