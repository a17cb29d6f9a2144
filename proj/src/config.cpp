#include "qtraj/config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

namespace qtraj {

namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(std::string origin, std::filesystem::path base) : origin_(std::move(origin)), base_(std::move(base)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    std::ostringstream os;
    os << origin_;
    if (at.IsDefined() && at.Mark().line >= 0) os << ':' << at.Mark().line + 1 << ':' << at.Mark().column + 1;
    os << ": " << msg;
    throw ConfigError(os.str());
  }

  YAML::Node section(const YAML::Node& root, const std::string& key, bool required) const {
    const YAML::Node n = root[key];
    if (!n) {
      if (required) fail(root, "missing section '" + key + "'");
      return n;
    }
    return n;
  }

  void only_keys(const YAML::Node& map, const std::string& where, std::initializer_list<const char*> keys) const {
    if (!map.IsMap()) fail(map, where + " must be a mapping");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.contains(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
    }
  }

  YAML::Node require(const YAML::Node& map, const std::string& key, const std::string& where) const {
    const YAML::Node n = map[key];
    if (!n) fail(map, "missing key '" + where + "." + key + "'");
    return n;
  }

  double number(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + " must be a number");
    const auto s = n.Scalar();
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
      fail(n, what + " must be a finite number, got '" + s + "'");
    }
    return v;
  }

  long long integer(const YAML::Node& n, const std::string& what) const {
    const double v = number(n, what);
    if (v != std::floor(v) || std::abs(v) > 9.0e15) fail(n, what + " must be an integer");
    return static_cast<long long>(v);
  }

  std::string text(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + " must be a string");
    return n.Scalar();
  }

  cplx complex(const YAML::Node& n, const std::string& what) const {
    if (n.IsSequence()) {
      if (n.size() != 2) fail(n, what + " as a list must be [re, im]");
      return {number(n[0], what), number(n[1], what)};
    }
    return number(n, what);
  }

  std::vector<int> int_list(const YAML::Node& n, const std::string& what) const {
    if (!n.IsSequence()) fail(n, what + " must be a list of integers");
    std::vector<int> out;
    for (const auto& e : n) out.push_back(static_cast<int>(integer(e, what)));
    return out;
  }

  std::filesystem::path path(const YAML::Node& n, const std::string& what) const {
    std::filesystem::path p = text(n, what);
    return p.is_absolute() ? p : base_ / p;
  }

 private:
  std::string origin_;
  std::filesystem::path base_;
};

json to_canonical(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : n) obj[kv.first.as<std::string>()] = to_canonical(kv.second);
      return obj;
    }
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& e : n) arr.push_back(to_canonical(e));
      return arr;
    }
    case YAML::NodeType::Scalar: {
      const auto& s = n.Scalar();
      if (n.Tag() != "!") {
        double v = 0.0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec == std::errc() && r.ptr == s.data() + s.size() && std::isfinite(v)) return v;
        if (s == "true" || s == "false") return s == "true";
        if (s == "~" || s == "null") return nullptr;
      }
      return s;
    }
    default:
      return nullptr;
  }
}

void parse_model(const Reader& rd, const YAML::Node& m, ModelSection& out) {
  rd.only_keys(m, "model", {"species", "L", "N", "N_up", "N_down", "J", "U", "boundary"});
  const auto species = rd.text(rd.require(m, "species", "model"), "model.species");
  if (species == "boson") {
    out.species = Species::Boson;
  } else if (species == "fermion") {
    out.species = Species::FermionSpinHalf;
  } else {
    rd.fail(m["species"], "model.species must be 'boson' or 'fermion', got '" + species + "'");
  }
  const auto L = rd.integer(rd.require(m, "L", "model"), "model.L");
  if (L < 1 || L > 64) rd.fail(m["L"], "model.L must be in [1, 64]");
  out.lattice.sites = static_cast<int>(L);
  out.lattice.J = rd.number(rd.require(m, "J", "model"), "model.J");
  out.lattice.U = m["U"] ? rd.number(m["U"], "model.U") : 0.0;
  const auto boundary = m["boundary"] ? rd.text(m["boundary"], "model.boundary") : std::string("open");
  if (boundary == "open") {
    out.lattice.boundary = Boundary::Open;
  } else if (boundary == "periodic") {
    out.lattice.boundary = Boundary::Periodic;
  } else {
    rd.fail(m["boundary"], "model.boundary must be 'open' or 'periodic'");
  }
  if (out.species == Species::Boson) {
    if (m["N_up"] || m["N_down"]) rd.fail(m, "bosons take model.N, not N_up/N_down");
    const auto n = rd.integer(rd.require(m, "N", "model"), "model.N");
    if (n < 0 || n > 255) rd.fail(m["N"], "model.N must be in [0, 255]");
    out.content = ParticleContent::bosons(static_cast<int>(n));
  } else {
    if (m["N"]) rd.fail(m["N"], "fermions take model.N_up and model.N_down");
    const auto up = rd.integer(rd.require(m, "N_up", "model"), "model.N_up");
    const auto down = rd.integer(rd.require(m, "N_down", "model"), "model.N_down");
    if (up < 0 || up > L) rd.fail(m["N_up"], "model.N_up must be in [0, L]");
    if (down < 0 || down > L) rd.fail(m["N_down"], "model.N_down must be in [0, L]");
    out.content = ParticleContent::fermions(static_cast<int>(up), static_cast<int>(down));
  }
  try {
    out.lattice.validate();
  } catch (const InvalidArgument& e) {
    rd.fail(m, e.what());
  }
}

void parse_probe(const Reader& rd, const YAML::Node& p, const ModelSection& model, ProbeSection& out) {
  rd.only_keys(p, "probe", {"J_jj", "J_ij", "quantity", "gamma", "cavity", "channels"});
  const int L = model.lattice.sites;
  if (const auto jj = p["J_jj"]) {
    if (jj.IsScalar()) {
      const auto kind = jj.Scalar();
      if (kind == "odd_sites") {
        out.diagonal = odd_sites_profile(L);
      } else if (kind == "alternating") {
        out.diagonal = alternating_profile(L);
      } else {
        rd.fail(jj, "probe.J_jj must be odd_sites, alternating, {r_mode: R}, {file: path} or a list");
      }
    } else if (jj.IsMap()) {
      rd.only_keys(jj, "probe.J_jj", {"r_mode", "file"});
      if (jj["r_mode"]) {
        const auto r = rd.integer(jj["r_mode"], "probe.J_jj.r_mode");
        if (r < 2) rd.fail(jj["r_mode"], "probe.J_jj.r_mode must be >= 2");
        out.diagonal = r_mode_profile(L, static_cast<int>(r));
      } else if (jj["file"]) {
        try {
          out.diagonal = load_diagonal_profile(rd.path(jj["file"], "probe.J_jj.file"));
        } catch (const InvalidArgument& e) {
          rd.fail(jj["file"], e.what());
        }
      } else {
        rd.fail(jj, "probe.J_jj mapping needs r_mode or file");
      }
    } else if (jj.IsSequence()) {
      DiagonalProfile prof;
      for (const auto& e : jj) prof.push_back(rd.complex(e, "probe.J_jj entry"));
      out.diagonal = std::move(prof);
    } else {
      rd.fail(jj, "probe.J_jj has an unsupported form");
    }
    if (out.diagonal->size() != static_cast<std::size_t>(L)) {
      rd.fail(jj, "probe.J_jj has " + std::to_string(out.diagonal->size()) + " entries but model.L is " +
                      std::to_string(L));
    }
  }
  if (const auto ij = p["J_ij"]) {
    try {
      if (ij.IsMap()) {
        rd.only_keys(ij, "probe.J_ij", {"file"});
        out.intersite = load_intersite_profile(rd.path(rd.require(ij, "file", "probe.J_ij"), "probe.J_ij.file"), L);
      } else {
        out.intersite = InterSiteProfile::uniform(model.lattice, rd.complex(ij, "probe.J_ij"));
      }
    } catch (const InvalidArgument& e) {
      rd.fail(ij, e.what());
    }
  }
  if (const auto q = p["quantity"]) {
    const auto s = rd.text(q, "probe.quantity");
    if (s == "density") {
      out.quantity = SiteQuantity::Density;
    } else if (s == "magnetization") {
      if (model.species != Species::FermionSpinHalf) rd.fail(q, "magnetization probes need fermions");
      out.quantity = SiteQuantity::Magnetization;
    } else {
      rd.fail(q, "probe.quantity must be density or magnetization");
    }
  }
  const auto g = p["gamma"];
  const auto cav = p["cavity"];
  if (bool(g) == bool(cav)) rd.fail(p, "probe needs exactly one of gamma or cavity");
  if (g) {
    const double gamma = rd.number(g, "probe.gamma");
    if (gamma < 0.0) rd.fail(g, "probe.gamma must be >= 0");
    out.strength = DirectGamma{gamma};
  } else {
    rd.only_keys(cav, "probe.cavity", {"omega10", "a0", "delta_p", "kappa"});
    CavityParameters cp;
    cp.omega10 = rd.number(rd.require(cav, "omega10", "probe.cavity"), "probe.cavity.omega10");
    cp.a0 = rd.complex(rd.require(cav, "a0", "probe.cavity"), "probe.cavity.a0");
    cp.delta_p = rd.number(rd.require(cav, "delta_p", "probe.cavity"), "probe.cavity.delta_p");
    cp.kappa = rd.number(rd.require(cav, "kappa", "probe.cavity"), "probe.cavity.kappa");
    if (!(cp.kappa > 0.0)) rd.fail(cav["kappa"], "probe.cavity.kappa must be > 0");
    out.strength = cp;
  }
  const auto ch = rd.require(p, "channels", "probe");
  if (!ch.IsSequence()) rd.fail(ch, "probe.channels must be a list");
  std::set<std::string> seen;
  for (const auto& e : ch) {
    const auto name = rd.text(e, "probe.channels entry");
    if (!seen.insert(name).second) rd.fail(e, "duplicate channel '" + name + "'");
    const bool needs_d = name == "D" || name == "D+B" || name == "Dx" || name == "Dy";
    const bool needs_b = name == "B" || name == "D+B";
    if (!needs_d && !needs_b) rd.fail(e, "unknown channel '" + name + "' (expected D, B, D+B, Dx, Dy)");
    if (needs_d && !out.diagonal) rd.fail(e, "channel '" + name + "' needs probe.J_jj");
    if (needs_b && !out.intersite) rd.fail(e, "channel '" + name + "' needs probe.J_ij");
    if ((name == "Dx" || name == "Dy") && model.species != Species::FermionSpinHalf) {
      rd.fail(e, "channel '" + name + "' is only defined for fermions");
    }
    out.channels.push_back(name);
  }
}

void parse_engine(const Reader& rd, const YAML::Node& e, RunConfig& out) {
  rd.only_keys(e, "engine", {"t_final", "sample_interval", "dt_max", "rtol", "atol", "jump_tol", "max_bisections",
                             "seed", "n_traj", "branch", "dimension_cap", "master_dimension_cap"});
  auto& ec = out.engine;
  ec.t_final = rd.number(rd.require(e, "t_final", "engine"), "engine.t_final");
  ec.sample_interval = rd.number(rd.require(e, "sample_interval", "engine"), "engine.sample_interval");
  if (e["dt_max"]) ec.dt_max = rd.number(e["dt_max"], "engine.dt_max");
  if (e["rtol"]) ec.rtol = rd.number(e["rtol"], "engine.rtol");
  if (e["atol"]) ec.atol = rd.number(e["atol"], "engine.atol");
  if (e["jump_tol"]) ec.jump_tol = rd.number(e["jump_tol"], "engine.jump_tol");
  if (e["max_bisections"]) ec.max_bisections = static_cast<int>(rd.integer(e["max_bisections"], "engine.max_bisections"));
  const auto seed = rd.require(e, "seed", "engine");
  const auto s = rd.text(seed, "engine.seed");
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) rd.fail(seed, "engine.seed must be a non-negative integer");
  ec.seed = v;
  if (e["n_traj"]) {
    const auto n = rd.integer(e["n_traj"], "engine.n_traj");
    if (n < 1) rd.fail(e["n_traj"], "engine.n_traj must be >= 1");
    out.n_traj = static_cast<std::size_t>(n);
  }
  if (e["branch"]) {
    const auto b = rd.text(e["branch"], "engine.branch");
    if (b == "stochastic") {
      out.branch = JumpMode::Stochastic;
    } else if (b == "no_jump") {
      out.branch = JumpMode::NoJump;
    } else {
      rd.fail(e["branch"], "engine.branch must be stochastic or no_jump");
    }
  }
  if (e["dimension_cap"]) {
    const auto c = rd.integer(e["dimension_cap"], "engine.dimension_cap");
    if (c < 1) rd.fail(e["dimension_cap"], "engine.dimension_cap must be >= 1");
    out.dimension_cap = static_cast<std::size_t>(c);
  }
  if (e["master_dimension_cap"]) {
    const auto c = rd.integer(e["master_dimension_cap"], "engine.master_dimension_cap");
    if (c < 1) rd.fail(e["master_dimension_cap"], "engine.master_dimension_cap must be >= 1");
    out.master_dimension_cap = static_cast<std::size_t>(c);
  }
  try {
    ec.validate();
  } catch (const InvalidArgument& err) {
    rd.fail(e, err.what());
  }
}

void parse_init(const Reader& rd, const YAML::Node& i, const ModelSection& model, InitSection& out) {
  const auto s = rd.text(i, "init");
  if (s == "ground_state") {
    out.kind = InitSection::Kind::GroundState;
  } else if (s.starts_with("fock:")) {
    out.kind = InitSection::Kind::Fock;
    std::stringstream ss(s.substr(5));
    std::string tok;
    int total = 0;
    while (std::getline(ss, tok, ',')) {
      int v = -1;
      const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (r.ec != std::errc() || r.ptr != tok.data() + tok.size() || v < 0 || v > 255) {
        rd.fail(i, "bad occupation '" + tok + "' in init");
      }
      out.occupation.push_back(static_cast<std::uint8_t>(v));
      total += v;
    }
    const int L = model.lattice.sites;
    const bool fermion = model.species == Species::FermionSpinHalf;
    const std::size_t modes = fermion ? 2 * std::size_t(L) : std::size_t(L);
    if (out.occupation.size() != modes) {
      rd.fail(i, "init fock state has " + std::to_string(out.occupation.size()) + " occupations but needs " +
                     std::to_string(modes) + (fermion ? " (2L: up block then down block)" : " (one per site)"));
    }
    if (total != model.content.n) rd.fail(i, "init fock state holds " + std::to_string(total) + " particles, model has " +
                                                 std::to_string(model.content.n));
  } else if (s.starts_with("file:")) {
    out.kind = InitSection::Kind::File;
    out.file = s.substr(5);
    YAML::Node tmp(out.file.string());
    out.file = rd.path(tmp, "init file");
  } else {
    rd.fail(i, "init must be ground_state, fock:<occupations> or file:<path>");
  }
}

void parse_observables(const Reader& rd, const YAML::Node& list, const RunConfig& cfg, std::vector<ObservableSpec>& out) {
  if (!list.IsSequence()) rd.fail(list, "observables must be a list");
  const std::set<std::string> kinds{"densities", "mean", "variance", "correlation", "distribution", "entropy", "imbalance"};
  const int L = cfg.model.lattice.sites;
  auto check_sites = [&](const YAML::Node& n, const std::vector<int>& sites, const std::string& what) {
    for (int s : sites)
      if (s < 0 || s >= L) rd.fail(n, what + " contains site " + std::to_string(s) + " outside [0, L)");
  };
  for (const auto& e : list) {
    ObservableSpec spec;
    if (e.IsScalar()) {
      spec.kind = e.Scalar();
    } else {
      rd.only_keys(e, "observables entry", {"kind", "name", "of", "sites", "zone_a", "zone_b", "partition", "mode"});
      spec.kind = rd.text(rd.require(e, "kind", "observables"), "observables.kind");
    }
    if (!kinds.contains(spec.kind)) rd.fail(e, "unknown observable kind '" + spec.kind + "'");
    if (e.IsMap()) {
      if (e["name"]) spec.name = rd.text(e["name"], "observables.name");
      if (e["of"]) spec.of = rd.text(e["of"], "observables.of");
      if (e["sites"]) spec.sites = rd.int_list(e["sites"], "observables.sites");
      if (e["zone_a"]) spec.zone_a = rd.int_list(e["zone_a"], "observables.zone_a");
      if (e["zone_b"]) spec.zone_b = rd.int_list(e["zone_b"], "observables.zone_b");
      if (e["mode"]) spec.mode = static_cast<int>(rd.integer(e["mode"], "observables.mode"));
      if (const auto p = e["partition"]) {
        if (p.IsScalar() && p.Scalar() == "profile") {
          if (!cfg.probe.diagonal) rd.fail(p, "partition 'profile' needs probe.J_jj");
          spec.partition_from_profile = true;
        } else if (!(p.IsScalar() && p.Scalar() == "odd_even")) {
          spec.partition = rd.int_list(p, "observables.partition");
          if (spec.partition->size() != static_cast<std::size_t>(L)) {
            rd.fail(p, "partition has " + std::to_string(spec.partition->size()) + " entries but model.L is " +
                           std::to_string(L));
          }
        }
      }
      check_sites(e, spec.sites, "sites");
      check_sites(e, spec.zone_a, "zone_a");
      check_sites(e, spec.zone_b, "zone_b");
    }
    if ((spec.kind == "mean" || spec.kind == "variance") && spec.of.empty()) rd.fail(e, spec.kind + " needs 'of'");
    if (spec.kind == "correlation" && (spec.zone_a.empty() || spec.zone_b.empty())) {
      rd.fail(e, "correlation needs zone_a and zone_b");
    }
    if (spec.kind == "entropy" && spec.sites.empty()) rd.fail(e, "entropy needs sites");
    if (spec.of == "zone" && spec.sites.empty()) rd.fail(e, "'of: zone' needs sites");
    if (spec.name.empty()) {
      if (spec.kind == "mean") spec.name = spec.of;
      if (spec.kind == "variance") spec.name = "var_" + spec.of;
      if (spec.kind == "correlation") spec.name = "corr";
      if (spec.kind == "distribution") spec.name = "p_mode" + std::to_string(spec.mode);
      if (spec.kind == "entropy") spec.name = "S";
      if (spec.kind == "imbalance") spec.name = "z";
    }
    out.push_back(std::move(spec));
  }
}

void parse_output(const Reader& rd, const YAML::Node& o, OutputSection& out) {
  rd.only_keys(o, "output", {"directory", "formats"});
  if (o["directory"]) out.directory = rd.text(o["directory"], "output.directory");
  if (const auto f = o["formats"]) {
    if (!f.IsSequence()) rd.fail(f, "output.formats must be a list");
    for (const auto& e : f) {
      const auto s = rd.text(e, "output.formats entry");
      if (s == "density") {
        out.write_density = true;
      } else if (s != "csv") {
        rd.fail(e, "unknown output format '" + s + "' (expected csv, density)");
      }
    }
  }
}

RunConfig parse_impl(const std::string& text, const std::string& origin, const std::filesystem::path& base) {
  const Reader rd(origin, base);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    std::ostringstream os;
    os << origin << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
    throw ConfigError(os.str());
  }
  if (!root.IsMap()) throw ConfigError(origin + ": top level must be a mapping");
  rd.only_keys(root, "config", {"model", "probe", "engine", "init", "observables", "output"});

  RunConfig cfg;
  parse_model(rd, rd.section(root, "model", true), cfg.model);
  parse_probe(rd, rd.section(root, "probe", true), cfg.model, cfg.probe);
  parse_engine(rd, rd.section(root, "engine", true), cfg);
  if (const auto i = root["init"]) parse_init(rd, i, cfg.model, cfg.init);
  if (const auto o = root["observables"]) parse_observables(rd, o, cfg, cfg.observables);
  if (cfg.observables.empty()) {
    ObservableSpec densities;
    densities.kind = "densities";
    cfg.observables.push_back(densities);
  }
  if (const auto o = root["output"]) parse_output(rd, o, cfg.output);

  cfg.source_text = text;
  cfg.canonical = to_canonical(root).dump();
  cfg.hash = sha256_hex(cfg.canonical);
  return cfg;
}

SparseOperator named_operator(const std::string& of, const ObservableSpec& spec, const RunConfig& cfg,
                              const Problem& p) {
  const auto& b = p.basis;
  const int L = cfg.model.lattice.sites;
  if (of == "D") {
    if (!cfg.probe.diagonal) throw ConfigError("observable '" + spec.name + "' needs probe.J_jj");
    return build_D(b, *cfg.probe.diagonal, cfg.probe.quantity);
  }
  if (of == "Dx" || of == "Dy") {
    if (!cfg.probe.diagonal) throw ConfigError("observable '" + spec.name + "' needs probe.J_jj");
    if (b->species() != Species::FermionSpinHalf) throw ConfigError(of + " is only defined for fermions");
    return build_D(b, *cfg.probe.diagonal, of == "Dx" ? SiteQuantity::Density : SiteQuantity::Magnetization);
  }
  if (of == "B") {
    if (!cfg.probe.intersite) throw ConfigError("observable '" + spec.name + "' needs probe.J_ij");
    return build_B(b, *cfg.probe.intersite, cfg.model.lattice);
  }
  if (of == "H0") return p.h0;
  if (of == "kinetic") return kinetic_op(b, cfg.model.lattice);
  if (of == "N_odd" || of == "N_even") return mode_number_op(b, ModePartition::odd_even(L), of == "N_odd" ? 0 : 1);
  if (of == "zone") return zone_number_op(b, spec.sites);
  if (of.starts_with("n_")) {
    int site = -1;
    const auto r = std::from_chars(of.data() + 2, of.data() + of.size(), site);
    if (r.ec == std::errc() && r.ptr == of.data() + of.size() && site >= 0 && site < L) return number_op(b, site);
  }
  throw ConfigError("unknown operator '" + of + "' (expected D, B, Dx, Dy, H0, kinetic, N_odd, N_even, n_<site>, zone)");
}

ModePartition partition_of(const ObservableSpec& spec, const RunConfig& cfg) {
  if (spec.partition_from_profile) return ModePartition::from_profile(*cfg.probe.diagonal);
  if (spec.partition) return ModePartition::from_assignment(*spec.partition);
  return ModePartition::odd_even(cfg.model.lattice.sites);
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string canonical_json(const std::string& yaml_text) { return to_canonical(YAML::Load(yaml_text)).dump(); }

RunConfig parse_config(const std::string& text, const std::string& origin) {
  return parse_impl(text, origin, std::filesystem::current_path());
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_impl(ss.str(), path.string(), path.parent_path().empty() ? "." : path.parent_path());
}

Problem build_problem(const RunConfig& cfg, std::size_t dimension_cap) {
  auto basis = build_basis(cfg.model.species, cfg.model.lattice.sites, cfg.model.content, dimension_cap);
  Problem p{basis, hubbard(basis, cfg.model.lattice), {}, {}, ObservableSet(basis)};

  const auto& probe = cfg.probe;
  for (const auto& name : probe.channels) {
    if (name == "D") {
      p.channels.push_back(make_channel(name, build_D(basis, *probe.diagonal, probe.quantity), probe.strength));
    } else if (name == "B") {
      p.channels.push_back(make_channel(name, build_B(basis, *probe.intersite, cfg.model.lattice), probe.strength));
    } else if (name == "D+B") {
      const auto a = build_D(basis, *probe.diagonal, probe.quantity) + build_B(basis, *probe.intersite, cfg.model.lattice);
      p.channels.push_back(make_channel(name, a, probe.strength));
    } else {
      const auto fc = build_fermion_channels(basis, *probe.diagonal, probe.strength);
      p.channels.push_back(name == "Dx" ? fc.x : fc.y);
    }
  }

  const auto dim = Eigen::Index(basis->dimension());
  switch (cfg.init.kind) {
    case InitSection::Kind::GroundState:
      p.psi0 = ground_state(p.h0).vector;
      break;
    case InitSection::Kind::Fock: {
      const auto k = basis->index(cfg.init.occupation);
      if (!k) throw ConfigError("init fock state is not in the basis sector");
      p.psi0 = Vec::Zero(dim);
      p.psi0[Eigen::Index(*k)] = 1.0;
      break;
    }
    case InitSection::Kind::File: {
      std::ifstream in(cfg.init.file);
      if (!in) throw ConfigError(cfg.init.file.string() + ": cannot open initial state file");
      std::vector<cplx> amps;
      std::string line;
      int lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double re = 0.0, im = 0.0;
        if (!(ls >> re >> im)) {
          throw ConfigError(cfg.init.file.string() + ":" + std::to_string(lineno) + ": expected 're im'");
        }
        amps.emplace_back(re, im);
      }
      if (amps.size() != basis->dimension()) {
        throw ConfigError(cfg.init.file.string() + ": " + std::to_string(amps.size()) +
                          " amplitudes but the basis has dimension " + std::to_string(basis->dimension()));
      }
      p.psi0 = Eigen::Map<const Vec>(amps.data(), dim);
      if (!(p.psi0.norm() > 0.0)) throw ConfigError(cfg.init.file.string() + ": initial state is zero");
      p.psi0 /= p.psi0.norm();
      break;
    }
  }

  for (const auto& spec : cfg.observables) {
    try {
      if (spec.kind == "densities") {
        p.observables.add_site_densities();
      } else if (spec.kind == "mean") {
        p.observables.add_mean(spec.name, named_operator(spec.of, spec, cfg, p));
      } else if (spec.kind == "variance") {
        p.observables.add_variance(spec.name, named_operator(spec.of, spec, cfg, p));
      } else if (spec.kind == "correlation") {
        p.observables.add_covariance(spec.name, zone_number_op(basis, spec.zone_a), zone_number_op(basis, spec.zone_b));
      } else if (spec.kind == "distribution") {
        const auto part = partition_of(spec, cfg);
        if (spec.mode < 0 || spec.mode >= part.modes) throw ConfigError("distribution mode out of range");
        p.observables.add_mode_distribution(spec.name, part, spec.mode);
      } else if (spec.kind == "entropy") {
        p.observables.add_entropy(spec.name, spec.sites);
      } else if (spec.kind == "imbalance") {
        const auto part = partition_of(spec, cfg);
        if (part.modes != 2) throw ConfigError("imbalance needs a two-mode partition");
        if (basis->particles() == 0) throw ConfigError("imbalance needs N > 0");
        const auto z = (mode_number_op(basis, part, 0) - mode_number_op(basis, part, 1)) * cplx(1.0 / basis->particles());
        p.observables.add_mean(spec.name, z);
      }
    } catch (const InvalidArgument& e) {
      throw ConfigError("observable '" + spec.name + "': " + e.what());
    }
  }
  return p;
}

}  // namespace qtraj
