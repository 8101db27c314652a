// Command-line driver: sweeps, figure data, closed-form tables, self test.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "haarcode/haarcode.hpp"

namespace hc = haarcode;

namespace {

struct Flags {
  std::string config, n, k, q, p_grid, w_grid, alpha, out;
  int samples = -1;
  long long seed = -1;
  long long budget_mb = -1;
  int threads = -1;
  bool big = false;
  bool dump = false;
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file");
  app->add_option("--n", f.n, "system sizes, e.g. 5,7,9");
  app->add_option("--k", f.k, "logical qudit counts");
  app->add_option("--q", f.q, "qudit dimensions");
  app->add_option("--p-grid", f.p_grid, "error rates: list or lo:hi:count");
  app->add_option("--w-grid", f.w_grid, "error weights");
  app->add_option("--alpha", f.alpha, "reweighting exponents (inf allowed)");
  app->add_option("--samples", f.samples, "codes per grid point");
  app->add_option("--seed", f.seed, "base seed");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--budget-mb", f.budget_mb, "memory budget in MiB");
  app->add_option("--threads", f.threads, "worker threads");
  app->add_flag("--big", f.big, "allow q^(N+k) up to 2^14");
  app->add_flag("--dump-samples", f.dump, "also write per-sample observables");
}

hc::ExperimentConfig build_config(const Flags& f) {
  hc::ExperimentConfig c = f.config.empty() ? hc::ExperimentConfig{} : hc::ExperimentConfig::load(f.config);
  if (!f.n.empty()) c.Ns = hc::parse_int_list<int>(f.n);
  if (!f.k.empty()) c.ks = hc::parse_int_list<int>(f.k);
  if (!f.q.empty()) c.qs = hc::parse_int_list<unsigned>(f.q);
  if (!f.p_grid.empty()) c.p_grid = hc::parse_grid(f.p_grid);
  if (!f.w_grid.empty()) c.w_grid = hc::parse_int_list<int>(f.w_grid);
  if (!f.alpha.empty()) c.alphas = hc::parse_grid(f.alpha);
  if (f.samples >= 0) c.samples = f.samples;
  if (f.seed >= 0) c.seed = static_cast<std::uint64_t>(f.seed);
  if (!f.out.empty()) c.out_dir = f.out;
  if (f.budget_mb >= 0) c.budget_mb = static_cast<std::size_t>(f.budget_mb);
  if (f.threads >= 0) c.threads = static_cast<unsigned>(f.threads);
  if (f.big) c.big = true;
  if (f.dump) c.dump_samples = true;
  return c;
}

int cmd_sweep(const hc::ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  auto man = hc::make_manifest("sweep", cfg);
  const auto res = hc::run_sweep(cfg);
  const auto dir = std::filesystem::path(cfg.out_dir);
  {
    std::ofstream os(dir / "sweep.csv");
    hc::write_sweep_csv(res.records, os);
    man.j["outputs"].push_back("sweep.csv");
  }
  if (cfg.dump_samples) {
    std::ofstream os(dir / "sweep_samples.csv");
    hc::write_samples_csv(res, os);
    man.j["outputs"].push_back("sweep_samples.csv");
  }
  man.finish((dir / "sweep_manifest.json").string());
  hc::write_sweep_csv(res.records, std::cout);
  return 0;
}

int cmd_ansatz(const hc::ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  auto man = hc::make_manifest("ansatz", cfg);
  const auto path = std::filesystem::path(cfg.out_dir) / "ansatz.csv";
  std::ofstream os(path);
  os << "N,k,q,p,alpha,H_alpha,p_c_alpha,w_star_over_N,ic_leading,s_alpha_q,s_alpha_rq,reweighted_vn,"
        "A_haar,B_haar,pfail_haar,s2q_haar,wc_q,wc_rq\n";
  for (int N : cfg.Ns)
    for (int k : cfg.ks)
      for (unsigned q : cfg.qs) {
        if (k > N) continue;
        const auto e = hc::enumerator_haar(N, k, q);
        const double top = 1.0 - 1.0 / (double(q) * q);
        for (double p : cfg.p_grid)
          for (double a : cfg.alphas) {
            using hc::fmt;
            const double pc = hc::threshold_solve(hc::ThresholdKind::renyi, a, double(k) / N, q);
            const double u = p < 1 ? hc::u_from_p(p, q) : hc::kInfinity;
            const bool in_range = p <= top;
            os << N << ',' << k << ',' << q << ',' << fmt(p) << ',' << fmt(a) << ','
               << fmt(hc::shannon_entropy(p, q, a)) << ',' << fmt(pc) << ','
               << fmt(p < 1 ? hc::w_star_fraction(p, a, q) : 1.0) << ','
               << fmt(hc::coherent_info_leading(p, N, k, q, a)) << ','
               << fmt(hc::renyi_entropy_leading(p, a, N, k, q, hc::Subsystem::Q)) << ','
               << fmt(hc::renyi_entropy_leading(p, a, N, k, q, hc::Subsystem::RQ)) << ','
               << fmt(p < 1 ? hc::reweighted_vn_leading(p, a, N, k, q) : N) << ','
               << fmt(in_range ? e.A(u) : NAN) << ',' << fmt(in_range ? e.B(u) : NAN) << ','
               << fmt(in_range ? hc::postselect_failure(e, u) : NAN) << ','
               << fmt(hc::renyi2_from_enumerators(e, hc::gamma_from_p(p, q)).s2_q) << ','
               << hc::critical_weight(N, k, q, hc::Subsystem::Q) << ','
               << hc::critical_weight(N, k, q, hc::Subsystem::RQ) << "\n";
          }
      }
  man.j["outputs"].push_back("ansatz.csv");
  man.finish((std::filesystem::path(cfg.out_dir) / "ansatz_manifest.json").string());
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

// Exact identities on small systems; prints one line per check.
int cmd_selftest(hc::ExperimentConfig cfg) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, double value) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << " (" << hc::fmt(value) << ")\n";
    if (!ok) ++failures;
  };
  const hc::CodeParams params{4, 1, 2, cfg.seed};
  const auto psi = hc::encode(params, 0);
  const auto rho = psi.rho_q();
  {
    const auto a = hc::depolarize(rho, 0.3);
    const auto b = hc::convex_sum_oracle(rho, 0.3);
    const double d = (a.mat - b.mat).cwiseAbs().maxCoeff();
    check("depolarize equals convex sum of fixed-weight channels", d < 1e-10, d);
  }
  {
    const auto a = hc::depolarize_dual(rho, 0.4);
    const auto b = hc::depolarize(rho, hc::p_from_gamma(0.4, 2));
    const double d = (a.mat - b.mat).cwiseAbs().maxCoeff();
    check("dual parametrization", d < 1e-12, d);
  }
  {
    const auto ps = hc::pauli_spectrum(psi.rho_rq().mat, 2, 1);
    double sum = 0;
    for (double x : ps.phi) sum += x;
    const double d = std::abs(sum - 32.0);
    check("phi sum rule on RQ", d < 1e-10, d);
    const auto e = hc::EnumeratorPair::numeric(*ps.logical, 4, 1, 2);
    double worst = 0;
    for (double u : {0.0, 0.2, 1.0 / 3.0, 0.7, 1.0}) worst = std::max(worst, std::abs(hc::macwilliams_check(e, u).transform));
    check("MacWilliams identity for a sampled code", worst < 1e-9, worst);
  }
  {
    double worst = 0;
    for (double p : {0.0, 0.05, 0.1, 0.2, 0.3})
      worst = std::max(worst, std::abs(hc::mean_shift_bands(p, 9, 1, 2, hc::Subsystem::Q).total_mass() - 1.0));
    check("mean-shift band model trace", worst < 1e-10, worst);
  }
  // Small figure data so that plotting scripts have something to read.
  cfg.Ns = {3, 4, 5};
  cfg.ks = {1};
  cfg.qs = {2};
  cfg.samples = std::min(cfg.samples, 4);
  cfg.w_grid = {1, 2};
  cfg.p_grid = {0.0, 0.1, 0.2, 0.3};
  cfg.alphas = {1.0, 2.0};
  hc::emit_figure_data(hc::FigureKind::micro, cfg);
  hc::emit_figure_data(hc::FigureKind::canonical, cfg);
  hc::emit_figure_data(hc::FigureKind::postselect, cfg);
  std::cout << "figure data in " << cfg.out_dir << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Haar-random code simulator"};
  app.require_subcommand(1);
  Flags flags;
  std::string figure;

  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over N, p and alpha");
  auto* fig = app.add_subcommand("figure", "write CSV data for a figure family");
  fig->add_option("kind", figure, "micro | canonical | postselect")->required();
  auto* ansatz = app.add_subcommand("ansatz", "closed-form predictions only");
  auto* selftest = app.add_subcommand("selftest", "exact identities plus small figure data");
  for (auto* s : {sweep, fig, ansatz, selftest}) add_flags(s, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const hc::ExperimentConfig cfg = build_config(flags);
    if (sweep->parsed()) return cmd_sweep(cfg);
    if (fig->parsed()) {
      const auto path = hc::emit_figure_data(hc::parse_figure(figure), cfg);
      std::cout << "wrote " << path << "\n";
      return 0;
    }
    if (ansatz->parsed()) return cmd_ansatz(cfg);
    if (selftest->parsed()) return cmd_selftest(cfg);
  } catch (const hc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const hc::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
