// qls: command-line front end for the qubit-array two-photon solvers.
//
//   qls <command> [--preset NAME] [--config FILE] [flags...]
//
// Precedence: preset < config file < command-line flags.
// Exit codes: 0 ok, 2 bad configuration, 3 solver failure, 4 partial sweep.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "qls/analysis.hpp"
#include "qls/effective.hpp"
#include "qls/io.hpp"
#include "qls/spectra.hpp"

#ifndef QLS_VERSION
#define QLS_VERSION "0.0.0"
#endif

namespace {

using qls::io::json;
namespace fs = std::filesystem;
namespace io = qls::io;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitPartial = 4;

// ---------------------------------------------------------------------------
// Presets: flag values taken from the figure captions.

struct Preset {
  std::vector<std::string> commands;
  json values;
};

const std::map<std::string, Preset>& presets() {
  static const std::map<std::string, Preset> table = {
      {"fig1", {{"spectrum", "classify"}, {{"n", 51}, {"phi", 0.05}, {"chi", "inf"}, {"sector", "2"}}}},
      {"fig2", {{"spectrum", "classify"}, {{"n", 51}, {"phi", 0.01}, {"chi", "inf"}, {"sector", "2"}}}},
      {"fig2d", {{"phase-diagram"}, {{"n", 25}}}},
      {"fig3",
       {{"fourier"},
        {{"n", 51}, {"phi", 0.05}, {"chi", "inf"}, {"target-re", -2.57}, {"target-im", -0.54}, {"rows", "1,26"}}}},
      {"fig4", {{"effective"}, {{"op", "L"}, {"n", 31}, {"kappa", 0.1}, {"n0", 2}}}},
      {"figS1", {{"spectrum"}, {{"n", 51}, {"phi", 0.4}, {"sector", "pairs"}}}},
      {"figS2", {{"green"}, {{"mode", "kernel"}, {"n", 31}, {"n0", 4}, {"n-min", 4}, {"source-y", 8}}}},
      {"figS3",
       {{"green"},
        {{"mode", "direct"}, {"n", 31}, {"energy-ratio", -194.0}, {"source-x", 25}, {"source-y", 8}, {"n0", 2}}}},
      {"figS4", {{"effective"}, {{"op", "odd"}, {"n", 31}, {"kappa", 0.1}, {"n0", 2}}}},
  };
  return table;
}

// ---------------------------------------------------------------------------
// Option registry: every bound flag can be read back for the manifest.

struct Registry {
  std::vector<std::pair<std::string, std::function<json()>>> getters;

  json resolved() const {
    json out = json::object();
    for (const auto& [name, get] : getters) out[name] = get();
    return out;
  }
};

template <class T>
CLI::Option* bind_opt(CLI::App* app, Registry& reg, const std::string& name, T& var, const std::string& desc) {
  reg.getters.emplace_back(name, [&var] { return json(var); });
  return app->add_option("--" + name, var, desc)->capture_default_str();
}

CLI::Option* bind_flag(CLI::App* app, Registry& reg, const std::string& name, bool& var, const std::string& desc) {
  reg.getters.emplace_back(name, [&var] { return json(var); });
  return app->add_flag("--" + name, var, desc);
}

std::string json_to_arg(const std::string& key, const json& v) {
  std::string value;
  if (v.is_boolean()) {
    value = v.get<bool>() ? "true" : "false";
  } else if (v.is_number_integer()) {
    value = std::to_string(v.get<long long>());
  } else if (v.is_number()) {
    value = io::format_double(v.get<double>());
  } else if (v.is_string()) {
    value = v.get<std::string>();
  } else {
    throw qls::ConfigError("config key '" + key + "' must be a scalar");
  }
  return "--" + key + "=" + value;
}

// ---------------------------------------------------------------------------
// Output bookkeeping: every file is hashed into the manifest; on failure all
// files written so far are removed.

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  fs::path add(const std::string& rel) {
    files_.push_back(rel);
    const auto path = dir_ / rel;
    fs::create_directories(path.parent_path());
    return path;
  }
  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

  void remove_all() const {
    std::error_code ec;
    for (const auto& f : files_) fs::remove(dir_ / f, ec);
    fs::remove(dir_ / "manifest.json", ec);
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

qls::Interaction parse_interaction(const std::string& s) {
  if (s == "inf" || s == "infinity" || s == "hard-core") return qls::Interaction::hard_core();
  const double v = io::parse_double(s);
  if (!(v >= 0.0) || !std::isfinite(v)) throw qls::ConfigError("--chi must be a nonnegative number or 'inf'");
  return qls::Interaction::finite(v);
}

qls::ArrayConfig array_config(int n, double phi, const std::string& chi) {
  qls::ArrayConfig cfg;
  cfg.n_qubits = n;
  cfg.phase = phi;
  cfg.chi = parse_interaction(chi);
  cfg.validate(1);
  return cfg;
}

json eigenvalue_list(const qls::VectorXcd& values, const qls::VectorXd& residuals) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    arr.push_back({{"re", values(i).real()}, {"im", values(i).imag()}, {"residual", residuals(i)}});
  }
  return arr;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(',', start);
    const auto tok = s.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    if (!tok.empty()) out.push_back(static_cast<int>(io::parse_double(tok)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

json classification_json(std::size_t index, qls::cplx energy, const qls::Classification& c) {
  json sv = json::array();
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(6, c.singular_values.size()); ++i) sv.push_back(c.singular_values(i));
  return {{"index", index},
          {"energy", io::complex_json(energy)},
          {"singular_values", std::move(sv)},
          {"ipr_loc_real", c.ipr_loc_real},
          {"ipr_free_recip", c.ipr_free_recip},
          {"residual_weight", c.residual_weight},
          {"is_cross", c.is_cross},
          {"status", qls::to_string(c.status)}};
}

// ---------------------------------------------------------------------------
// Commands

struct SpectrumCmd {
  int n = 51;
  double phi = 0.05;
  std::string chi = "inf";
  std::string sector = "2";
  bool bundle = false;
  bool no_vectors = false;

  void add(CLI::App* app, Registry& reg) {
    bind_opt(app, reg, "n", n, "number of qubits N");
    bind_opt(app, reg, "phi", phi, "phase q0*d between neighbours");
    bind_opt(app, reg, "chi", chi, "on-site interaction: number (units of gamma0) or 'inf' for hard core");
    bind_opt(app, reg, "sector", sector, "1 (single excitation), 2 (two excitations) or pairs (chi = 0 pair sums)")
        ->check(CLI::IsMember({"1", "2", "pairs"}));
    bind_flag(app, reg, "bundle", bundle, "write all two-excitation states into one states.csv");
    bind_flag(app, reg, "no-vectors", no_vectors, "write eigenvalues only");
  }

  json run(Outputs& out) const {
    const auto cfg = array_config(n, phi, chi);
    json details;
    if (sector == "1") {
      const auto spec = qls::single_particle_spectrum(cfg);
      io::write_json(out.add("eigenvalues.json"), eigenvalue_list(spec.eigenvalues, spec.residuals));
      if (!no_vectors) io::write_csv(out.add("eigenvectors.csv"), io::complex_matrix_table(spec.eigenvectors));
      details["count"] = spec.size();
      details["max_residual"] = spec.max_residual();
    } else if (sector == "2") {
      cfg.validate(2);
      const auto spec = qls::two_excitation_spectrum(cfg);
      qls::VectorXcd eps(static_cast<Eigen::Index>(spec.states.size()));
      qls::VectorXd res(eps.size());
      for (std::size_t i = 0; i < spec.states.size(); ++i) {
        eps(Eigen::Index(i)) = spec.states[i].energy;
        res(Eigen::Index(i)) = spec.states[i].residual;
      }
      io::write_json(out.add("eigenvalues.json"), eigenvalue_list(eps, res));
      if (!no_vectors) {
        if (bundle) {
          std::vector<qls::MatrixXcd> mats;
          for (const auto& s : spec.states) mats.push_back(s.psi);
          io::write_csv(out.add("states.csv"), io::complex_bundle_table(mats));
        } else {
          for (std::size_t i = 0; i < spec.states.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "states/state_%05zu.csv", i);
            io::write_csv(out.add(name), io::complex_matrix_table(spec.states[i].psi));
          }
        }
      }
      details["count"] = spec.states.size();
      details["max_residual"] = spec.pair_spectrum.max_residual();
      details["defective_count"] = spec.pair_spectrum.defective_count();
    } else {
      cfg.validate(2);
      const auto pairs = qls::noninteracting_pair_spectrum(cfg);
      qls::VectorXcd eps(static_cast<Eigen::Index>(pairs.size()));
      for (std::size_t i = 0; i < pairs.size(); ++i) eps(Eigen::Index(i)) = pairs[i];
      io::write_json(out.add("eigenvalues.json"), eigenvalue_list(eps, qls::VectorXd::Zero(eps.size())));
      details["count"] = pairs.size();
    }
    return details;
  }
};

/// Read back a two-excitation spectrum written by `spectrum --sector 2`.
qls::TwoExcitationSpectrum load_spectrum_dir(const fs::path& dir) {
  const auto values = io::read_json(dir / "eigenvalues.json");
  std::vector<qls::MatrixXcd> mats;
  if (fs::exists(dir / "states.csv")) {
    mats = io::table_to_complex_bundle(io::read_csv(dir / "states.csv"));
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "states/state_%05zu.csv", i);
      mats.push_back(io::table_to_complex_matrix(io::read_csv(dir / name)));
    }
  }
  if (mats.size() != values.size() || mats.empty()) throw qls::ConfigError(dir.string() + ": state count mismatch");
  const int n = static_cast<int>(mats.front().rows());
  bool hard_core = true;
  for (const auto& m : mats) hard_core = hard_core && m.diagonal().cwiseAbs().maxCoeff() == 0.0;
  qls::ComplexSpectrum pair;
  pair.eigenvalues.resize(static_cast<Eigen::Index>(values.size()));
  pair.residuals.resize(pair.eigenvalues.size());
  std::vector<qls::TwoExcState> states;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const qls::cplx eps = io::complex_from_json(values[i]);
    pair.eigenvalues(Eigen::Index(i)) = 2.0 * eps;
    pair.residuals(Eigen::Index(i)) = values[i].at("residual").get<double>();
    states.push_back({eps, mats[i], pair.residuals(Eigen::Index(i))});
  }
  return {qls::PairBasis(n, hard_core ? qls::PairMode::HardCore : qls::PairMode::FiniteChi), std::move(pair),
          std::move(states)};
}

struct ClassifyCmd {
  int n = 51;
  double phi = 0.05;
  std::string chi = "inf";
  double ipr_min = 0.12;
  double sv_max = 0.25;
  std::string from;

  void add(CLI::App* app, Registry& reg) {
    bind_opt(app, reg, "n", n, "number of qubits N");
    bind_opt(app, reg, "phi", phi, "phase q0*d");
    bind_opt(app, reg, "chi", chi, "on-site interaction: number or 'inf'");
    bind_opt(app, reg, "ipr-min", ipr_min, "minimum IPR of the localized (real space) and free (standing waves) factors");
    bind_opt(app, reg, "sv-max", sv_max, "maximum of the remaining Schmidt singular values");
    bind_opt(app, reg, "from", from, "read states from a spectrum output directory instead of solving");
  }

  json run(Outputs& out) const {
    const auto spec = from.empty() ? [&] {
      auto cfg = array_config(n, phi, chi);
      cfg.validate(2);
      return qls::two_excitation_spectrum(cfg);
    }() : load_spectrum_dir(from);
    const auto result = qls::classify_spectrum(spec, {ipr_min, sv_max});
    json states = json::array();
    for (std::size_t i = 0; i < result.states.size(); ++i)
      states.push_back(classification_json(i, spec.states[i].energy, result.states[i]));
    const json summary = {{"total", result.states.size()},
                          {"cross_count", result.cross_count},
                          {"cross_fraction", result.cross_fraction()}};
    io::write_json(out.add("classification.json"), {{"summary", summary}, {"states", std::move(states)}});
    std::cout << "cross states: " << result.cross_count << " / " << result.states.size()
              << " (fraction " << io::format_double(result.cross_fraction()) << ")\n";
    return summary;
  }
};

struct PhaseDiagramCmd {
  int n = 25;
  int jobs = 1;
  double ipr_min = 0.12;
  double sv_max = 0.25;
  double phi_min = 0.05;
  double phi_max = std::numbers::pi;
  int phi_count = 21;
  double chi_min_exp = -1.0;
  double chi_max_exp = 3.0;
  int chi_count = 13;

  void add(CLI::App* app, Registry& reg) {
    if (const char* env = std::getenv("QLS_JOBS")) {
      try {
        jobs = std::max(1, static_cast<int>(io::parse_double(env)));
      } catch (const qls::ConfigError&) {
        throw qls::ConfigError("QLS_JOBS must be a positive integer");
      }
    }
    bind_opt(app, reg, "n", n, "number of qubits N");
    bind_opt(app, reg, "jobs", jobs, "worker threads (default from QLS_JOBS, else 1)")->check(CLI::PositiveNumber);
    bind_opt(app, reg, "ipr-min", ipr_min, "classification IPR threshold");
    bind_opt(app, reg, "sv-max", sv_max, "classification singular-value threshold");
    bind_opt(app, reg, "phi-min", phi_min, "first phase");
    bind_opt(app, reg, "phi-max", phi_max, "last phase");
    bind_opt(app, reg, "phi-count", phi_count, "number of phases")->check(CLI::PositiveNumber);
    bind_opt(app, reg, "chi-min-exp", chi_min_exp, "log10 of the smallest nonzero chi");
    bind_opt(app, reg, "chi-max-exp", chi_max_exp, "log10 of the largest finite chi");
    bind_opt(app, reg, "chi-count", chi_count, "number of log-spaced finite chi values (chi = 0 and inf are always added)")
        ->check(CLI::PositiveNumber);
  }

  qls::PhaseGrid grid() const {
    qls::PhaseGrid g;
    for (int i = 0; i < phi_count; ++i)
      g.phases.push_back(phi_count == 1 ? phi_min : phi_min + i * (phi_max - phi_min) / (phi_count - 1));
    g.interactions.push_back(qls::Interaction::finite(0.0));
    for (int j = 0; j < chi_count; ++j) {
      const double e = chi_count == 1 ? chi_min_exp : chi_min_exp + j * (chi_max_exp - chi_min_exp) / (chi_count - 1);
      g.interactions.push_back(qls::Interaction::finite(std::pow(10.0, e)));
    }
    g.interactions.push_back(qls::Interaction::hard_core());
    return g;
  }

  json run(Outputs& out, int& exit_code) const {
    if (n < 2) throw qls::ConfigError("phase diagram needs N >= 2");
    const auto pd = qls::phase_diagram(n, grid(), {ipr_min, sv_max}, static_cast<unsigned>(jobs));
    io::CsvTable t;
    t.header.push_back("phi");
    for (const auto& chi : pd.interactions) t.header.push_back(chi.is_hard_core() ? "inf" : io::format_double(chi.value()));
    for (std::size_t i = 0; i < pd.phases.size(); ++i) {
      std::vector<double> row{pd.phases[i]};
      for (Eigen::Index j = 0; j < pd.fraction.cols(); ++j) row.push_back(pd.fraction(Eigen::Index(i), j));
      t.rows.push_back(std::move(row));
    }
    io::write_csv(out.add("phase_diagram.csv"), t);

    json failures = json::array();
    for (const auto& f : pd.failures) {
      const auto& chi = pd.interactions[f.chi_index];
      failures.push_back({{"phi", pd.phases[f.phase_index]},
                          {"chi", chi.is_hard_core() ? json("inf") : json(chi.value())},
                          {"message", f.message}});
    }
    double peak = 0.0;
    for (Eigen::Index i = 0; i < pd.fraction.size(); ++i)
      if (std::isfinite(pd.fraction(i))) peak = std::max(peak, pd.fraction(i));
    if (pd.success_ratio() < 0.9) exit_code = kExitPartial;
    return {{"success_ratio", pd.success_ratio()}, {"max_fraction", peak}, {"failures", std::move(failures)}};
  }
};

struct FourierCmd {
  int n = 51;
  double phi = 0.05;
  std::string chi = "inf";
  double target_re = -2.57;
  double target_im = -0.54;
  int state = -1;
  std::string rows;
  std::string grid = "full";

  void add(CLI::App* app, Registry& reg) {
    bind_opt(app, reg, "n", n, "number of qubits N");
    bind_opt(app, reg, "phi", phi, "phase q0*d");
    bind_opt(app, reg, "chi", chi, "on-site interaction: number or 'inf'");
    bind_opt(app, reg, "target-re", target_re, "pick the state closest to this energy (real part)");
    bind_opt(app, reg, "target-im", target_im, "pick the state closest to this energy (imaginary part)");
    bind_opt(app, reg, "state", state, "state index in sorted order; overrides the target when >= 0");
    bind_opt(app, reg, "rows", rows, "comma-separated rows m for 1D transforms (default: 1 and the center)");
    bind_opt(app, reg, "grid", grid, "k grid: full (2 pi j / N) or half (pi j / N)")->check(CLI::IsMember({"full", "half"}));
  }

  json run(Outputs& out) const {
    auto cfg = array_config(n, phi, chi);
    cfg.validate(2);
    const auto spec = qls::two_excitation_spectrum(cfg);
    std::size_t pick = 0;
    if (state >= 0) {
      if (static_cast<std::size_t>(state) >= spec.states.size()) throw qls::ConfigError("--state out of range");
      pick = static_cast<std::size_t>(state);
    } else {
      const qls::cplx target(target_re, target_im);
      for (std::size_t i = 1; i < spec.states.size(); ++i)
        if (std::abs(spec.states[i].energy - target) < std::abs(spec.states[pick].energy - target)) pick = i;
    }
    const auto& psi = spec.states[pick].psi;
    const auto kgrid = grid == "full" ? qls::FourierGrid::FullZone : qls::FourierGrid::HalfZone;
    auto row_list = parse_int_list(rows);
    if (row_list.empty()) row_list = {1, (n + 1) / 2};

    io::CsvTable t;
    t.header.push_back("k");
    json row_info = json::array();
    std::vector<qls::SpectralDensity1D> dens;
    for (int m : row_list) {
      dens.push_back(qls::fourier_1d(psi, m, kgrid));
      t.header.push_back("m" + std::to_string(m));
      row_info.push_back({{"m", m}, {"spectral_ipr", qls::spectral_ipr(dens.back().density)}});
    }
    for (int j = 0; j < n; ++j) {
      std::vector<double> row{dens.front().k(j)};
      for (const auto& d : dens) row.push_back(d.density(j));
      t.rows.push_back(std::move(row));
    }
    io::write_csv(out.add("state.csv"), io::complex_matrix_table(psi));
    io::write_csv(out.add("fourier_rows.csv"), t);
    io::write_csv(out.add("fourier_2d.csv"), io::real_matrix_table(qls::fourier_2d(psi, kgrid)));
    const auto cls = qls::classify_state(spec.states[pick]);
    return {{"state", classification_json(pick, spec.states[pick].energy, cls)}, {"rows", std::move(row_info)}};
  }
};

struct GreenCmd {
  std::string mode = "direct";
  int n = 31;
  double energy_ratio = -194.0;
  int source_x = 25;
  int source_y = 8;
  int n0 = 2;
  int n_min = 0;

  void add(CLI::App* app, Registry& reg) {
    bind_opt(app, reg, "mode", mode, "direct (linear solve), resonant (separable approximation) or kernel (short-range g)")
        ->check(CLI::IsMember({"direct", "resonant", "kernel"}));
    bind_opt(app, reg, "n", n, "array size N");
    bind_opt(app, reg, "energy-ratio", energy_ratio, "eps / (phi gamma0)");
    bind_opt(app, reg, "source-x", source_x, "source site x' (1-based)");
    bind_opt(app, reg, "source-y", source_y, "source site y' (1-based); reference site of the kernel fit");
    bind_opt(app, reg, "n0", n0, "resonant standing-wave index");
    bind_opt(app, reg, "n-min", n_min, "first standing wave in the kernel sum (0: n0 + 1)");
  }

  json run(Outputs& out) const {
    const int first = n_min > 0 ? n_min : n0 + 1;
    if (mode == "kernel") {
      const auto g = qls::short_range_g(n, first, source_y);
      io::write_csv(out.add("kernel.csv"), io::real_matrix_table(g.values));
      const double k_next = std::numbers::pi * first / n;
      return {{"n_min", first}, {"kappa_fit", g.kappa_fit}, {"amplitude", g.amplitude}, {"k_next", k_next}};
    }
    if (mode == "direct") {
      const auto g = qls::greens_function_direct(n, energy_ratio, source_x, source_y);
      io::write_csv(out.add("green.csv"), io::real_matrix_table(g.values));
      return {{"residual", g.residual}};
    }
    const auto g = qls::greens_function_resonant(n, energy_ratio, n0, first, source_x, source_y);
    io::write_csv(out.add("green.csv"), io::real_matrix_table(g.values));
    return {{"n_min", first}};
  }
};

struct OddState {
  Eigen::Index index;
  double eigenvalue;
  qls::VectorXd profile;
};

/// Eigenstates of L that are odd under reflection about the array center.
std::vector<OddState> odd_states(const qls::ComplexSpectrum& spec, std::size_t count) {
  std::vector<OddState> out;
  for (Eigen::Index j = 0; j < spec.size() && out.size() < count; ++j) {
    const qls::VectorXd v = spec.eigenvectors.col(j).real().normalized();
    if (v.dot(v.reverse()) < -0.5) out.push_back({j, spec.eigenvalues(j).real(), v});
  }
  return out;
}

struct EffectiveCmd {
  std::string op = "L";
  int n = 31;
  double kappa = 0.1;
  int n0 = 2;
  double phi = 0.01;
  int count = 10;
  double kappa_min = 0.02;
  int kappa_count = 9;

  void add(CLI::App* app, Registry& reg) {
    bind_opt(app, reg, "op", op, "L (localization operator), transformed (two-photon field equation), odd (analytic odd "
                             "profiles vs L eigenstates) or ipr-scan (third L eigenstate vs kappa)")
        ->check(CLI::IsMember({"L", "transformed", "odd", "ipr-scan"}));
    bind_opt(app, reg, "n", n, "array size N");
    bind_opt(app, reg, "kappa", kappa, "cutoff kappa (largest kappa for ipr-scan)");
    bind_opt(app, reg, "n0", n0, "standing-wave index of u0");
    bind_opt(app, reg, "phi", phi, "phase, for the transformed equation");
    bind_opt(app, reg, "count", count, "number of transformed fields to write");
    bind_opt(app, reg, "kappa-min", kappa_min, "smallest kappa for ipr-scan");
    bind_opt(app, reg, "kappa-count", kappa_count, "number of kappa values for ipr-scan")->check(CLI::PositiveNumber);
  }

  json run(Outputs& out) const {
    if (op == "transformed") {
      const auto ts = qls::solve_transformed_equation(n, phi);
      io::CsvTable ev{{"index", "energy_ratio"}, {}};
      for (std::size_t i = 0; i < ts.states.size(); ++i) ev.rows.push_back({double(i), ts.states[i].energy_ratio});
      io::write_csv(out.add("transformed_eigenvalues.csv"), ev);
      io::CsvTable fields{{"state", "row"}, {}};
      for (int c = 1; c <= n; ++c) fields.header.push_back("c" + std::to_string(c));
      const auto written = std::min<std::size_t>(static_cast<std::size_t>(std::max(count, 0)), ts.states.size());
      for (std::size_t s = 0; s < written; ++s) {
        for (int r = 0; r < n; ++r) {
          std::vector<double> row{double(s), double(r + 1)};
          for (int c = 0; c < n; ++c) row.push_back(ts.states[s].field(r, c));
          fields.rows.push_back(std::move(row));
        }
      }
      io::write_csv(out.add("fields.csv"), fields);
      return {{"states", ts.states.size()}, {"deflated", ts.deflated}};
    }

    if (op == "ipr-scan") {
      io::CsvTable t{{"kappa", "eigenvalue", "ipr", "peak_site"}, {}};
      for (int i = 0; i < kappa_count; ++i) {
        const double k = kappa_count == 1 ? kappa : kappa_min + i * (kappa - kappa_min) / (kappa_count - 1);
        const auto spec = qls::solve_L(qls::build_L_operator(n, k, n0));
        if (spec.size() < 3) throw qls::ConfigError("ipr-scan needs N >= 3");
        const qls::VectorXd v = spec.eigenvectors.col(2).real();
        t.rows.push_back({k, spec.eigenvalues(2).real(), qls::ipr_real(v), double(qls::peak_site(v))});
      }
      io::write_csv(out.add("ipr_scan.csv"), t);
      return json::object();
    }

    const auto op_l = qls::build_L_operator(n, kappa, n0);
    const auto spec = qls::solve_L(op_l);
    if (op == "L") {
      io::CsvTable ev{{"index", "re", "im"}, {}};
      for (Eigen::Index i = 0; i < spec.size(); ++i)
        ev.rows.push_back({double(i), spec.eigenvalues(i).real(), spec.eigenvalues(i).imag()});
      io::write_csv(out.add("L_eigenvalues.csv"), ev);
      io::write_csv(out.add("L_eigenvectors.csv"), io::complex_matrix_table(spec.eigenvectors));
      if (spec.size() < 3) throw qls::ConfigError("L operator needs N >= 3 for the third eigenstate");
      io::CsvTable third{{"site", "value", "u0"}, {}};
      for (int x = 0; x < n; ++x) third.rows.push_back({double(x + 1), spec.eigenvectors(x, 2).real(), op_l.u0(x)});
      io::write_csv(out.add("third_state.csv"), third);
      const qls::VectorXd v = spec.eigenvectors.col(2).real();
      return {{"third_eigenvalue", spec.eigenvalues(2).real()},
              {"third_ipr", qls::ipr_real(v)},
              {"third_peak_site", qls::peak_site(v)},
              {"node", qls::standing_wave_node(n, n0)}};
    }

    // op == "odd"
    if (n0 % 2) throw qls::ConfigError("odd-profile analysis needs an even n0 (node at the array center)");
    const double center = qls::standing_wave_node(n, n0);
    const double slope = qls::node_slope(op_l);
    const auto odd = odd_states(spec, 3);
    io::CsvTable t{{"site"}, {}};
    json states = json::array();
    std::vector<qls::VectorXd> analytic;
    for (std::size_t i = 0; i < odd.size(); ++i) {
      const auto fit = qls::fit_odd_profile(odd[i].profile, center);
      qls::VectorXd a = qls::analytic_odd_profile(fit.x0, center, n);
      if (a.dot(odd[i].profile) < 0) a = -a;
      analytic.push_back(a);
      t.header.push_back("numeric" + std::to_string(i + 1));
      t.header.push_back("analytic" + std::to_string(i + 1));
      states.push_back({{"index", odd[i].index},
                        {"eigenvalue", odd[i].eigenvalue},
                        {"x0", fit.x0},
                        {"overlap", fit.overlap},
                        {"analytic_energy", qls::analytic_odd_energy(fit.x0, slope, op_l.a)}});
    }
    for (int x = 0; x < n; ++x) {
      std::vector<double> row{double(x + 1)};
      for (std::size_t i = 0; i < odd.size(); ++i) {
        row.push_back(odd[i].profile(x));
        row.push_back(analytic[i](x));
      }
      t.rows.push_back(std::move(row));
    }
    io::write_csv(out.add("odd_profiles.csv"), t);
    return {{"center", center}, {"node_slope", slope}, {"states", std::move(states)}};
  }
};

// ---------------------------------------------------------------------------

/// Value of --name / --name=value in args, if present.
std::string find_arg(const std::vector<std::string>& args, const std::string& name) {
  std::string value;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == name && i + 1 < args.size()) value = args[i + 1];
    if (args[i].rfind(name + "=", 0) == 0) value = args[i].substr(name.size() + 1);
  }
  return value;
}

int run(int argc, char** argv) {
  CLI::App app{"Two-photon states of a waveguide-coupled qubit array", "qls"};
  app.set_version_flag("--version", QLS_VERSION);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  SpectrumCmd spectrum;
  ClassifyCmd classify;
  PhaseDiagramCmd phase;
  FourierCmd fourier;
  GreenCmd green;
  EffectiveCmd effective;
  std::map<std::string, Registry> regs;
  std::map<std::string, std::string> out_dirs;
  std::string preset, config_file;

  struct Entry {
    std::string name, help;
    std::function<void(CLI::App*, Registry&)> add;
  };
  const std::vector<Entry> entries = {
      {"spectrum", "eigenvalues and eigenvectors of the one- or two-excitation problem",
       [&](CLI::App* a, Registry& r) { spectrum.add(a, r); }},
      {"classify", "Schmidt decomposition and cross-state classification",
       [&](CLI::App* a, Registry& r) { classify.add(a, r); }},
      {"phase-diagram", "fraction of cross states over a (phi, chi) grid",
       [&](CLI::App* a, Registry& r) { phase.add(a, r); }},
      {"fourier", "1D and 2D Fourier maps of a two-excitation state",
       [&](CLI::App* a, Registry& r) { fourier.add(a, r); }},
      {"green", "two-photon Green's functions and the short-range kernel",
       [&](CLI::App* a, Registry& r) { green.add(a, r); }},
      {"effective", "transformed field equation and localization operator",
       [&](CLI::App* a, Registry& r) { effective.add(a, r); }},
  };
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    auto& reg = regs[e.name];
    std::string names;
    for (const auto& [pname, p] : presets())
      for (const auto& c : p.commands)
        if (c == e.name) names += (names.empty() ? "" : ", ") + pname;
    bind_opt(sub, reg, "preset", preset, "named parameter set: " + names);
    sub->add_option("--config", config_file, "flat JSON file keyed by flag names; flags override it");
    out_dirs[e.name] = "out/" + e.name;
    bind_opt(sub, reg, "out", out_dirs[e.name], "output directory");
    e.add(sub, reg);
  }

  // Assemble argv as: command, preset values, config values, user flags.
  std::vector<std::string> user(argv + 1, argv + argc);
  std::vector<std::string> args;
  if (!user.empty() && regs.count(user.front())) {
    const std::string& cmd = user.front();
    auto* sub = app.get_subcommand(cmd);
    auto known = [&](const std::string& key) { return key != "config" && sub->get_option_no_throw("--" + key); };
    args.push_back(cmd);
    const auto preset_name = find_arg(user, "--preset");
    const auto config_path = find_arg(user, "--config");
    json config = json::object();
    if (!config_path.empty()) {
      config = io::read_json(config_path);
      if (!config.is_object()) throw qls::ConfigError(config_path + ": config must be a JSON object");
      for (const auto& [key, _] : config.items())
        if (!known(key)) throw qls::ConfigError(config_path + ": unknown key '" + key + "' for " + cmd);
    }
    const std::string chosen = !preset_name.empty() ? preset_name : config.value("preset", std::string());
    if (!chosen.empty()) {
      const auto it = presets().find(chosen);
      if (it == presets().end()) throw qls::ConfigError("unknown preset '" + chosen + "'");
      if (std::find(it->second.commands.begin(), it->second.commands.end(), cmd) == it->second.commands.end())
        throw qls::ConfigError("preset '" + chosen + "' does not apply to " + cmd);
      for (const auto& [key, v] : it->second.values.items())
        if (known(key)) args.push_back(json_to_arg(key, v));
    }
    for (const auto& [key, v] : config.items()) args.push_back(json_to_arg(key, v));
    args.insert(args.end(), user.begin() + 1, user.end());
  } else {
    args = user;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();
  Outputs out(out_dirs[cmd]);
  const auto start = std::chrono::steady_clock::now();
  int exit_code = kExitOk;
  json details;
  try {
    fs::create_directories(out.dir());
    if (cmd == "spectrum") details = spectrum.run(out);
    else if (cmd == "classify") details = classify.run(out);
    else if (cmd == "phase-diagram") details = phase.run(out, exit_code);
    else if (cmd == "fourier") details = fourier.run(out);
    else if (cmd == "green") details = green.run(out);
    else details = effective.run(out);

    io::RunManifest manifest;
    manifest.command = cmd;
    manifest.config = regs[cmd].resolved();
    manifest.version = QLS_VERSION;
    manifest.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& f : out.files()) manifest.outputs.push_back({f, io::sha256_file(out.dir() / f)});
    manifest.details = std::move(details);
    io::write_json(out.dir() / "manifest.json", io::to_json(manifest));
  } catch (...) {
    out.remove_all();
    throw;
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qls::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const qls::SingularityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const qls::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
}
