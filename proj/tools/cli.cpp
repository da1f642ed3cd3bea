#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "config_file.hpp"
#include "manifest.hpp"
#include "su11/analytic.hpp"
#include "su11/fock.hpp"
#include "su11/gaussian.hpp"
#include "su11/noise_eval.hpp"
#include "su11/optimize.hpp"

namespace su11::cli {

namespace {

struct Options {
  std::string platform = "spinor";
  double n_total = 1e4;
  double r = 1.0;
  double n_s = 0;
  double theta = kPi / 4;
  double nu = 1.5 * kPi;
  double phi = 0;
  double n_f = 1.0;
  std::string engine = "analytic";
  std::string objective = "qfi";
  double delta_n = 0, sigma_varphi = 0, gamma = 0, gamma_a0 = 0, gamma_b0 = 0;
  int n_traj = 10000;
  double dt = 1e-3;
  std::uint64_t seed = 20240607;
  unsigned threads = 0;
  int cap = 60;
  std::string out;
  std::string dump;
  // sweep
  std::string axis = "n_s";
  std::string values;
  double from = 0, to = 0;
  int count = 0;
  bool log_grid = false;
  // figure
  std::string figure;
  int points = 41;
  double ns_min = 1e-2, ns_max = 1e3;
  std::string ns_list = "10,50,500";
  std::string studies = "loss,detection,dephasing";
  std::string gamma_grid, delta_n_grid = "0,1,10,100,1000,10000,100000", sigma_grid = "0,0.05,0.1,0.2,0.5,1";
};

// Locale-independent shortest-ish formatting for CSV and console output.
std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 10);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto b = tok.find_first_not_of(" \t"), e = tok.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    tok = tok.substr(b, e - b + 1);
    double v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw ConfigError(std::string("bad number '") + tok + "' in " + what);
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(std::string(what) + " is empty");
  return out;
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

Method method_from(const std::string& s) {
  for (Method m : {Method::Analytic, Method::Gaussian, Method::Fock, Method::TW})
    if (s == to_string(m)) return m;
  throw ConfigError("unknown engine '" + s + "'");
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw std::logic_error("csv row width mismatch");
    rows_.push_back(std::move(row));
  }
  void write(std::ostream& os) const {
    line(os, header_);
    for (const auto& r : rows_) line(os, r);
  }

 private:
  static void line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      const std::string& c = cells[i];
      if (c.find_first_of(",\"\n") == std::string::npos) {
        os << c;
      } else {
        os << '"';
        for (char ch : c) os << (ch == '"' ? "\"\"" : std::string(1, ch));
        os << '"';
      }
    }
    os << '\n';
  }
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Context {
  Options o;
  CLI::App* sub = nullptr;
  std::vector<std::string> argv;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  std::chrono::steady_clock::time_point start;
  bool row_failures = false;
  ConfigEntries resolved;  // full-precision values the run actually used
};

std::string exact(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void record(Context& c, const std::string& k, const std::string& v) {
  for (auto& e : c.resolved)
    if (e.first == k) {
      e.second = v;
      return;
    }
  c.resolved.emplace_back(k, v);
}

InterferometerConfig make_config(Context& c) {
  const Options& o = c.o;
  InterferometerConfig cfg;
  cfg.platform = platform_from_string(o.platform);
  cfg.n_total = o.n_total;
  const bool has_ns = c.sub->get_option_no_throw("--n-s") && c.sub->get_option("--n-s")->count() > 0;
  const bool has_r = c.sub->get_option_no_throw("--r") && c.sub->get_option("--r")->count() > 0;
  if (has_ns && has_r) throw ConfigError("give either --r or --n-s, not both");
  cfg.r = has_ns ? r_from_side_population(o.n_s) : o.r;
  cfg.theta = o.theta;
  cfg = with_nu(cfg, o.nu);
  cfg.phi = o.phi;
  cfg.n_f = o.n_f;
  validate(cfg);
  record(c, "platform", to_string(cfg.platform));
  for (const auto& [k, v] : {std::pair<const char*, double>{"n-total", cfg.n_total}, {"r", cfg.r},
                             {"n-s", side_population(cfg.r)}, {"theta", cfg.theta}, {"nu", canonical_nu(cfg)},
                             {"phi", cfg.phi}, {"n-f", cfg.n_f}})
    record(c, k, exact(v));
  return cfg;
}

NoiseSpec make_noise(Context& c) {
  const Options& o = c.o;
  NoiseSpec n;
  n.delta_n = o.delta_n;
  n.sigma_varphi = o.sigma_varphi;
  n.gamma = o.gamma;
  n.gamma_a0 = o.gamma_a0;
  n.gamma_b0 = o.gamma_b0;
  validate(n);
  for (const auto& [k, v] : {std::pair<const char*, double>{"delta-n", n.delta_n}, {"sigma-varphi", n.sigma_varphi},
                             {"gamma", n.gamma}, {"gamma-a0", n.gamma_a0}, {"gamma-b0", n.gamma_b0}})
    record(c, k, exact(v));
  return n;
}

tw::TWConfig make_tw(Context& c, double phi_eval) {
  const Options& o = c.o;
  tw::TWConfig t;
  t.n_traj = o.n_traj;
  t.dt = o.dt;
  t.master_seed = o.seed;
  t.phi_eval = phi_eval;
  tw::validate(t);
  record(c, "n-traj", std::to_string(t.n_traj));
  record(c, "dt", exact(t.dt));
  record(c, "seed", std::to_string(t.master_seed));
  record(c, "phi-eval", exact(t.phi_eval));
  return t;
}

ConfigEntries snapshot(const CLI::App* sub) {
  ConfigEntries cfg;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || name == "out" || name == "dump") continue;
    if (opt->get_positional() || opt->count() == 0) continue;
    cfg.emplace_back(name, opt->get_type_size() == 0 ? "true" : opt->as<std::string>());
  }
  return cfg;
}

// Writes a table to --out (plus manifest) or to stdout.
void emit(Context& c, const Table& t, bool to_stdout_when_no_out = true) {
  if (c.o.out.empty()) {
    if (to_stdout_when_no_out) t.write(*c.out);
    return;
  }
  {
    std::ofstream f(c.o.out, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + c.o.out + "'");
    t.write(f);
  }
  RunManifest m;
  m.command_line = c.argv;
  m.subcommand = c.sub->get_name();
  m.config = snapshot(c.sub);
  m.resolved = c.resolved;
  m.master_seed = c.o.seed;
  m.threads = thread_count();
  m.kernel_path = tw::active_kernel_path() == tw::KernelPath::Avx2 ? "avx2" : "scalar";
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - c.start).count();
  m.outputs = {c.o.out};
  if (!c.o.dump.empty()) m.outputs.push_back(c.o.dump);
  write_manifest(m);
}

double fock_qfi(const InterferometerConfig& cfg, const fock::FockOptions& fo, double* tail) {
  fock::CoherentPumpMixture mix = fock::coherent_mixture(cfg, fo);
  const double kt = fock::kappa_t_for(cfg);
  for (auto& e : mix.sectors) {
    if (cfg.platform == Platform::Spinor3)
      fock::evolve_spin_mixing(e.state, kt, fo.raw_q ? fo.q_t : fock::default_q_t(kt, cfg.n_total), fo);
    else
      fock::evolve_fwm(e.state, kt, fo);
  }
  *tail = mix.tail;
  return analytic::qfi_from_general_moments(fock::moments_and_correlators(mix), cfg.theta, 0.5 * canonical_nu(cfg),
                                            cfg.platform);
}

int cmd_qfi(Context& c) {
  const InterferometerConfig cfg = make_config(c);
  const Method m = method_from(c.o.engine);
  double value = 0, tail = 0;
  switch (m) {
    case Method::Analytic:
    case Method::Gaussian: {
      OptimizeOptions opt;
      value = evaluate_objective(cfg, m, Objective::QFI, opt).value;
      break;
    }
    case Method::Fock: {
      fock::FockOptions fo;
      fo.cap = c.o.cap;
      value = fock_qfi(cfg, fo, &tail);
      break;
    }
    case Method::TW:
      throw ConfigError("the QFI is available from the analytic, gaussian and fock engines");
  }
  *c.out << "F = " << num(value) << '\n';
  if (m == Method::Fock) *c.out << "tail = " << num(tail) << (tail > fock::kTailFlag ? " (flagged)" : "") << '\n';
  Table t({"platform", "engine", "n_total", "r", "n_s", "theta", "nu", "qfi"});
  t.add({to_string(cfg.platform), to_string(m), num(cfg.n_total), num(cfg.r), num(side_population(cfg.r)),
         num(cfg.theta), num(canonical_nu(cfg)), num(value)});
  emit(c, t, false);
  return 0;
}

bool given(const Context& c, const char* flag) {
  const CLI::Option* o = c.sub->get_option_no_throw(flag);
  return o && o->count() > 0;
}

int cmd_sensitivity(Context& c) {
  const InterferometerConfig cfg = make_config(c);
  const NoiseSpec noise = make_noise(c);
  const Method m = method_from(c.o.engine);
  const double nu = canonical_nu(cfg);
  double dphi = 0, se = 0, phi = c.o.phi, tail = 0;
  switch (m) {
    case Method::Analytic: {
      if (noise.sigma_varphi > 0) throw ConfigError("phase-difference noise needs the gaussian engine");
      if (given(c, "--phi")) {
        dphi = analytic::sensitivity_from_moments(analytic::number_sum_moments(cfg.theta, nu, phi, cfg), noise.delta_n)
                   .delta_phi;
      } else {
        OptimizeOptions opt;
        opt.noise = noise;
        const OptimumResult r = evaluate_objective(cfg, m, Objective::DeltaPhiN, opt);
        dphi = r.value;
        phi = r.phi_opt;
      }
      break;
    }
    case Method::Gaussian: {
      if (noise.sigma_varphi > 0) {
        const gaussian::PhaseNoiseResult r = gaussian::phase_noise_sensitivity(cfg, noise.sigma_varphi);
        dphi = r.result.delta_phi;
        phi = r.result.operating_point.phi;
        break;
      }
      if (!given(c, "--phi")) phi = gaussian::kDefaultPhiEval;
      if (noise.delta_n == 0) {
        dphi = gaussian::sensitivity_numeric(cfg, phi).delta_phi;
      } else {
        const SignalMoments s = gaussian::run_chain(cfg, phi, 0.0);
        dphi = analytic::sensitivity_from_moments(s, noise.delta_n).delta_phi;
      }
      break;
    }
    case Method::Fock: {
      if (noise.sigma_varphi > 0 || noise.gamma > 0) throw ConfigError("the fock engine models detection noise only");
      if (!given(c, "--phi")) phi = gaussian::kDefaultPhiEval;
      fock::FockOptions fo;
      fo.cap = c.o.cap;
      const fock::FockRun r = fock::full_interferometer(fock::coherent_mixture(cfg, fo), cfg, phi, fo);
      dphi = analytic::sensitivity_from_moments(r.moments, noise.delta_n).delta_phi;
      tail = r.tail;
      break;
    }
    case Method::TW: {
      if (!given(c, "--phi")) phi = 0.02;
      const tw::TwResult r = tw::tw_sensitivity(cfg, noise, make_tw(c, phi));
      dphi = r.result.delta_phi;
      se = r.result.std_error;
      break;
    }
  }
  if (!std::isfinite(dphi) || !(dphi > 0)) throw NumericalError("sensitivity is not a positive finite number");
  *c.out << "delta_phi = " << num(dphi) << '\n';
  if (m == Method::TW) *c.out << "std_error = " << num(se) << '\n';
  Table t({"platform", "engine", "theta", "nu", "phi", "delta_n", "sigma_varphi", "delta_phi", "std_error", "tail"});
  t.add({to_string(cfg.platform), to_string(m), num(cfg.theta), num(nu), num(phi), num(noise.delta_n),
         num(noise.sigma_varphi), num(dphi), num(se), num(tail)});
  emit(c, t, false);
  return 0;
}

int cmd_optimize(Context& c) {
  const InterferometerConfig cfg = make_config(c);
  OptimizeOptions opt;
  opt.noise = make_noise(c);
  const Method m = method_from(c.o.engine);
  const Objective obj = objective_from_string(c.o.objective);
  const OptimumResult r = optimize_interferometer(cfg, m, obj, opt);
  const double conv = conventional_reference(cfg, m, obj, opt);
  *c.out << "theta_opt = " << num(r.theta_opt) << "\nnu_opt = " << num(r.nu_opt) << "\nphi_opt = " << num(r.phi_opt)
         << "\nvalue = " << num(r.value) << "\nconventional = " << num(conv) << '\n';
  if (r.multimodal) *c.out << "note: several local optima were refined\n";
  Table t({"objective", "engine", "theta_opt", "nu_opt", "phi_opt", "value", "conventional", "multimodal"});
  t.add({to_string(obj), to_string(m), num(r.theta_opt), num(r.nu_opt), num(r.phi_opt), num(r.value), num(conv),
         r.multimodal ? "1" : "0"});
  emit(c, t, false);
  return 0;
}

std::vector<double> grid_values(const Context& c) {
  const Options& o = c.o;
  if (!o.values.empty()) {
    if (o.count > 0) throw ConfigError("give either --values or --from/--to/--count");
    return parse_list(o.values, "--values");
  }
  if (o.count < 1) throw ConfigError("sweep needs --values or --from/--to/--count");
  std::vector<double> v(static_cast<std::size_t>(o.count));
  if (o.count == 1) return {o.from};
  for (int i = 0; i < o.count; ++i) {
    const double s = static_cast<double>(i) / (o.count - 1);
    if (o.log_grid) {
      if (!(o.from > 0) || !(o.to > 0)) throw ConfigError("a log grid needs positive end points");
      v[i] = std::exp(std::log(o.from) + s * (std::log(o.to) - std::log(o.from)));
    } else {
      v[i] = o.from + s * (o.to - o.from);
    }
  }
  return v;
}

void report_row_errors(Context& c, const std::string& what, const std::vector<std::string>& errs,
                       const std::vector<double>& xs) {
  for (std::size_t i = 0; i < errs.size(); ++i) {
    if (errs[i].empty()) continue;
    *c.err << "row " << i << " (" << what << " = " << num(xs[i]) << "): " << errs[i] << '\n';
    c.row_failures = true;
  }
}

int cmd_sweep(Context& c) {
  const InterferometerConfig cfg = make_config(c);
  OptimizeOptions opt;
  opt.noise = make_noise(c);
  const Method m = method_from(c.o.engine);
  if (m == Method::TW) opt.tw = make_tw(c, given(c, "--phi") ? c.o.phi : 0.02);
  SweepSpec spec;
  spec.axis = axis_from_string(c.o.axis);
  spec.objective = objective_from_string(c.o.objective);
  spec.values = grid_values(c);
  const std::vector<SweepRow> rows = sweep(cfg, spec, m, opt);
  Table t({spec.axis == Axis::NS ? "n_s" : to_string(spec.axis), "value", "theta_opt", "nu_opt", "phi_opt",
           "conventional", "std_error", "error"});
  std::vector<std::string> errs;
  for (const SweepRow& r : rows) {
    t.add({num(r.x), num(r.value), num(r.theta_opt), num(r.nu_opt), num(r.phi_opt), num(r.conventional),
           num(r.std_error), r.error});
    errs.push_back(r.error);
  }
  emit(c, t);
  report_row_errors(c, to_string(spec.axis), errs, spec.values);
  return c.row_failures ? 2 : 0;
}

int cmd_tw_run(Context& c) {
  const InterferometerConfig cfg = make_config(c);
  const NoiseSpec noise = make_noise(c);
  const double phi = given(c, "--phi") ? c.o.phi : 0.02;
  const tw::TWConfig twc = make_tw(c, phi);
  if (!c.o.dump.empty()) {
    std::ofstream f(c.o.dump, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + c.o.dump + "'");
    tw::Ensemble ens = tw::sample_initial(cfg, twc);
    tw::write_trajectory_dump(f, ens);
    if (cfg.platform == Platform::Spinor3)
      tw::integrate_spin_mixing(ens, 1.0 / cfg.n_total, noise.gamma, cfg.r, twc);
    else
      tw::integrate_fwm(ens, 1.0 / std::sqrt(hybrid_na0(cfg.n_total, cfg.n_f) * hybrid_nb0(cfg.n_total, cfg.n_f)),
                        noise.gamma_a0, noise.gamma_b0, cfg.r, twc);
    tw::write_trajectory_dump(f, ens);
  }
  const tw::TwResult r = tw::tw_sensitivity(cfg, noise, twc);
  *c.out << "delta_phi = " << num(r.result.delta_phi) << "\nstd_error = " << num(r.result.std_error)
         << "\nloss_fraction = " << num(r.loss_fraction) << '\n';
  if (r.stderr_flag) *c.out << "note: standard error above 20% of the estimate; raise --n-traj\n";
  Table t({"platform", "n_traj", "dt", "seed", "phi", "delta_phi", "std_error", "mean", "variance", "slope",
           "loss_fraction_first", "loss_fraction", "stderr_flag"});
  t.add({to_string(cfg.platform), std::to_string(twc.n_traj), num(twc.dt), std::to_string(twc.master_seed), num(phi),
         num(r.result.delta_phi), num(r.result.std_error), num(r.moments.mean), num(r.moments.variance),
         num(r.moments.slope), num(r.loss_fraction_first), num(r.loss_fraction), r.stderr_flag ? "1" : "0"});
  emit(c, t, false);
  return 0;
}

int cmd_fock_run(Context& c) {
  const InterferometerConfig cfg = make_config(c);
  const NoiseSpec noise = make_noise(c);
  if (noise.sigma_varphi > 0 || noise.gamma > 0) throw ConfigError("the fock engine models detection noise only");
  const double phi = given(c, "--phi") ? c.o.phi : gaussian::kDefaultPhiEval;
  fock::FockOptions fo;
  fo.cap = c.o.cap;
  const fock::CoherentPumpMixture init = fock::coherent_mixture(cfg, fo);
  if (!c.o.dump.empty()) {
    std::ofstream f(c.o.dump, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + c.o.dump + "'");
    fock::write_dump(f, fock::prepare(init, cfg, fo));
  }
  const fock::FockRun r = fock::full_interferometer(init, cfg, phi, fo);
  const double dphi = analytic::sensitivity_from_moments(r.moments, noise.delta_n).delta_phi;
  *c.out << "mean = " << num(r.moments.mean) << "\nvariance = " << num(r.moments.variance)
         << "\nslope = " << num(r.moments.slope) << "\ndelta_phi = " << num(dphi) << "\ntail = " << num(r.tail)
         << '\n';
  if (r.tail_flag) *c.out << "note: truncation tail above " << num(fock::kTailFlag) << "; raise --cap\n";
  Table t({"platform", "n_total", "r", "theta", "nu", "phi", "cap", "mean", "variance", "slope", "delta_phi", "tail",
           "tail_flag"});
  t.add({to_string(cfg.platform), num(cfg.n_total), num(cfg.r), num(cfg.theta), num(canonical_nu(cfg)), num(phi),
         std::to_string(fo.cap), num(r.moments.mean), num(r.moments.variance), num(r.moments.slope), num(dphi),
         num(r.tail), r.tail_flag ? "1" : "0"});
  emit(c, t, false);
  return 0;
}

int figure_2(Context& c, Platform p) {
  Options& o = c.o;
  InterferometerConfig cfg = make_config(c);
  cfg.platform = p;
  if (o.points < 2) throw ConfigError("--points must be at least 2");
  if (!(o.ns_min > 0) || !(o.ns_max > o.ns_min)) throw ConfigError("need 0 < --ns-min < --ns-max");
  if (!(o.ns_max < cfg.n_total)) throw ConfigError("--ns-max must stay below --n-total");
  SweepSpec spec;
  spec.axis = Axis::NS;
  for (int i = 0; i < o.points; ++i)
    spec.values.push_back(std::exp(std::log(o.ns_min) + (std::log(o.ns_max) - std::log(o.ns_min)) * i / (o.points - 1)));
  spec.objective = Objective::QFI;
  const auto q = sweep(cfg, spec, Method::Analytic);
  spec.objective = Objective::DeltaPhiN;
  const auto d = sweep(cfg, spec, Method::Analytic);
  Table t({"n_s", "delta_phi_min", "delta_phi_N", "delta_phi_su11", "theta_opt"});
  std::vector<std::string> errs;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double ns = spec.values[i];
    t.add({num(ns), num(1 / std::sqrt(q[i].value)), num(d[i].value), num(1 / std::sqrt(ns * (ns + 2))),
           num(q[i].theta_opt)});
    errs.push_back(!q[i].error.empty() ? q[i].error : d[i].error);
  }
  emit(c, t);
  report_row_errors(c, "n_s", errs, spec.values);
  return c.row_failures ? 2 : 0;
}

int figure_3(Context& c, bool absolute) {
  Options& o = c.o;
  const InterferometerConfig base = make_config(c);
  const std::vector<double> ns_list = parse_list(o.ns_list, "--ns-list");
  const std::vector<std::string> studies = split_words(o.studies);
  for (const auto& s : studies)
    if (s != "loss" && s != "detection" && s != "dephasing") throw ConfigError("unknown study '" + s + "'");
  StudyOptions so;
  so.tw = make_tw(c, given(c, "--phi") ? o.phi : 0.02);
  const std::vector<double> gammas = !o.gamma_grid.empty() ? parse_list(o.gamma_grid, "--gamma-grid")
                                     : base.platform == Platform::Spinor3 ? kSpinorLossGrid
                                                                          : kHybridLossGrid;
  std::vector<std::string> header{"study", "n_s", "x", "control"};
  if (absolute) {
    for (const char* h : {"delta_phi_pumped", "stderr_pumped", "delta_phi_conventional", "stderr_conventional"})
      header.push_back(h);
  } else {
    for (const char* h : {"ratio", "stderr_ratio"}) header.push_back(h);
  }
  for (const char* h : {"phi_pumped", "phi_conventional", "loss_fraction_conventional", "error"}) header.push_back(h);
  Table t(header);
  std::vector<std::string> errs;
  std::vector<double> xs;
  for (double ns : ns_list) {
    InterferometerConfig cfg = base;
    cfg.r = r_from_side_population(ns);
    validate(cfg);
    for (const auto& s : studies) {
      std::vector<RobustnessRow> rows;
      if (s == "loss") rows = loss_study(cfg, gammas, so);
      if (s == "detection") rows = detection_study(cfg, parse_list(o.delta_n_grid, "--delta-n-grid"), so);
      if (s == "dephasing") rows = dephasing_study(cfg, parse_list(o.sigma_grid, "--sigma-grid"), so);
      for (const RobustnessRow& r : rows) {
        std::vector<std::string> row{s, num(ns), num(r.x), num(r.control)};
        if (absolute) {
          for (double v : {r.delta_phi_pumped, r.stderr_pumped, r.delta_phi_conventional, r.stderr_conventional})
            row.push_back(num(v));
        } else {
          row.push_back(num(r.ratio));
          row.push_back(num(r.stderr_ratio));
        }
        for (double v : {r.phi_pumped, r.phi_conventional, r.loss_fraction_conventional}) row.push_back(num(v));
        row.push_back(r.error);
        t.add(std::move(row));
        errs.push_back(r.error);
        xs.push_back(r.control);
      }
    }
  }
  emit(c, t);
  report_row_errors(c, "control", errs, xs);
  return c.row_failures ? 2 : 0;
}

int cmd_figure(Context& c) {
  if (c.o.figure == "fig2a") return figure_2(c, Platform::Spinor3);
  if (c.o.figure == "fig2b") return figure_2(c, Platform::Hybrid4);
  if (c.o.figure == "fig3") return figure_3(c, false);
  return figure_3(c, true);
}

void add_physics(CLI::App* s, Options& o) {
  s->add_option("--platform", o.platform, "spinor or hybrid")->check(CLI::IsMember({"spinor", "hybrid"}));
  s->add_option("--n-total", o.n_total, "total particle number");
  s->add_option("--r", o.r, "squeezing parameter");
  s->add_option("--n-s", o.n_s, "side-mode population 2 sinh^2 r (instead of --r)");
  s->add_option("--theta", o.theta, "mixer angle");
  s->add_option("--nu", o.nu, "total mixer phase");
  s->add_option("--phi", o.phi, "interrogation phase");
  s->add_option("--n-f", o.n_f, "hybrid pump ratio atoms/photons");
}

void add_noise(CLI::App* s, Options& o) {
  s->add_option("--delta-n", o.delta_n, "detection number resolution");
  s->add_option("--sigma-varphi", o.sigma_varphi, "phase-difference noise");
  s->add_option("--gamma", o.gamma, "two-body loss rate (spinor)");
  s->add_option("--gamma-a0", o.gamma_a0, "atomic pump loss rate (hybrid)");
  s->add_option("--gamma-b0", o.gamma_b0, "optical pump loss rate (hybrid)");
}

void add_tw(CLI::App* s, Options& o) {
  s->add_option("--n-traj", o.n_traj, "trajectories");
  s->add_option("--dt", o.dt, "time step");
  s->add_option("--seed", o.seed, "master seed");
}

void add_common(CLI::App* s, Options& o) {
  s->add_option("--out", o.out, "CSV output file (a manifest is written next to it)");
  s->add_option("--threads", o.threads, "worker threads (0: SU11_THREADS or all cores)");
}

void check_env_threads() {
  const char* env = std::getenv("SU11_THREADS");
  if (!env) return;
  const std::string s(env);
  unsigned v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || v == 0)
    throw ConfigError("SU11_THREADS must be a positive integer");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context c;
  c.out = &out;
  c.err = &err;
  c.start = std::chrono::steady_clock::now();
  for (int i = 0; i < argc; ++i) c.argv.emplace_back(argv[i]);
  Options& o = c.o;

  CLI::App app{"Pumped-up SU(1,1) interferometry toolkit", "su11"};
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "key = value file (or a run manifest); flags override it");

  auto* qfi = app.add_subcommand("qfi", "quantum Fisher information at the given angles");
  add_physics(qfi, o);
  add_common(qfi, o);
  qfi->add_option("--engine", o.engine, "analytic, gaussian or fock");
  qfi->add_option("--cap", o.cap, "fock: largest sector particle number");

  auto* sens = app.add_subcommand("sensitivity", "number-sum phase sensitivity");
  add_physics(sens, o);
  add_noise(sens, o);
  add_tw(sens, o);
  add_common(sens, o);
  sens->add_option("--engine", o.engine, "analytic, gaussian, fock or tw");
  sens->add_option("--cap", o.cap, "fock: largest sector particle number");

  auto* optc = app.add_subcommand("optimize", "optimal mixer angle and phase");
  add_physics(optc, o);
  add_noise(optc, o);
  add_common(optc, o);
  optc->add_option("--engine", o.engine, "analytic or gaussian");
  optc->add_option("--objective", o.objective, "qfi, delta_phi_n or ratio");

  auto* sw = app.add_subcommand("sweep", "objective along one axis");
  add_physics(sw, o);
  add_noise(sw, o);
  add_tw(sw, o);
  add_common(sw, o);
  sw->add_option("--engine", o.engine, "analytic, gaussian or tw");
  sw->add_option("--objective", o.objective, "qfi, delta_phi_n or ratio");
  sw->add_option("--axis", o.axis, "n_s, r, theta, nu, phi, delta_n, sigma_varphi, gamma or n_f");
  sw->add_option("--values", o.values, "comma-separated axis values");
  sw->add_option("--from", o.from, "first grid value");
  sw->add_option("--to", o.to, "last grid value");
  sw->add_option("--count", o.count, "number of grid values");
  sw->add_flag("--log", o.log_grid, "logarithmic grid");

  auto* twr = app.add_subcommand("tw-run", "truncated-Wigner sensitivity estimate");
  add_physics(twr, o);
  add_noise(twr, o);
  add_tw(twr, o);
  add_common(twr, o);
  twr->add_option("--dump", o.dump, "trajectory dump before and after the first mixing");

  auto* fr = app.add_subcommand("fock-run", "exact Fock-space interferometer");
  add_physics(fr, o);
  add_noise(fr, o);
  add_common(fr, o);
  fr->add_option("--cap", o.cap, "largest sector particle number");
  fr->add_option("--dump", o.dump, "amplitudes after the mixing and first mixer");

  auto* fig = app.add_subcommand("figure", "figure data: fig2a, fig2b, fig3, figS1");
  fig->add_option("name", o.figure, "figure")->required()->check(CLI::IsMember({"fig2a", "fig2b", "fig3", "figS1"}));
  add_physics(fig, o);
  add_tw(fig, o);
  add_common(fig, o);
  fig->add_option("--points", o.points, "fig2: grid points");
  fig->add_option("--ns-min", o.ns_min, "fig2: smallest n_s");
  fig->add_option("--ns-max", o.ns_max, "fig2: largest n_s");
  fig->add_option("--ns-list", o.ns_list, "fig3/figS1: side-mode populations");
  fig->add_option("--studies", o.studies, "fig3/figS1: loss, detection, dephasing");
  fig->add_option("--gamma-grid", o.gamma_grid, "fig3/figS1: loss rates");
  fig->add_option("--delta-n-grid", o.delta_n_grid, "fig3/figS1: detection resolutions");
  fig->add_option("--sigma-grid", o.sigma_grid, "fig3/figS1: phase-difference noise levels");

  try {
    check_env_threads();
    // Config entries go first so command-line flags (parsed later) win.
    std::vector<std::string> args(c.argv.begin() + std::min<std::size_t>(1, c.argv.size()), c.argv.end());
    std::string cfg_file;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) cfg_file = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) cfg_file = args[i].substr(9);
    }
    if (!cfg_file.empty()) {
      const ConfigEntries entries = read_config_file(cfg_file);
      CLI::App* target = nullptr;
      std::size_t pos = 0;
      for (; pos < args.size(); ++pos) {
        for (CLI::App* s : app.get_subcommands([](const CLI::App*) { return true; }))
          if (s->get_name() == args[pos]) target = s;
        if (target) break;
      }
      if (target) {
        std::vector<std::string> injected;
        for (const auto& [k, v] : entries) {
          if (k == "config") continue;
          if (target->get_option_no_throw("--" + k)) {
            const CLI::Option* op = target->get_option("--" + k);
            if (op->get_type_size() == 0) {
              if (v == "true" || v == "1") injected.push_back("--" + k);
            } else {
              injected.push_back("--" + k + "=" + v);
            }
            continue;
          }
          bool known = false;
          for (CLI::App* s : app.get_subcommands([](const CLI::App*) { return true; }))
            if (s->get_option_no_throw("--" + k)) known = true;
          if (!known && k != "name") throw ConfigError("unknown config key '" + k + "'");
        }
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos) + 1, injected.begin(), injected.end());
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const CLI::App* bad = nullptr;
    for (const CLI::App* s : app.get_subcommands()) bad = s;
    err << (bad ? bad->help() : app.help());
    return 1;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  c.sub = app.get_subcommands().front();
  try {
    if (o.threads > 0) set_thread_count(o.threads);
    const std::string name = c.sub->get_name();
    if (name == "qfi") return cmd_qfi(c);
    if (name == "sensitivity") return cmd_sensitivity(c);
    if (name == "optimize") return cmd_optimize(c);
    if (name == "sweep") return cmd_sweep(c);
    if (name == "tw-run") return cmd_tw_run(c);
    if (name == "fock-run") return cmd_fock_run(c);
    return cmd_figure(c);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure in " << c.sub->get_name() << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure in " << c.sub->get_name() << ": " << e.what() << '\n';
    return 2;
  }
}

}  // namespace su11::cli
