// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion carries a wall-clock budget that is enforced.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "mvlab/ergodicity.hpp"
#include "mvlab/systems.hpp"
#include "mvlab/transport.hpp"

namespace fs = std::filesystem;
using namespace mvlab;

namespace {

int g_failures = 0;

void criterion(int id, const std::string& what, double budget_sec,
               const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    auto start = std::chrono::steady_clock::now();
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > budget_sec) {
        ok = false;
        char buf[64];
        std::snprintf(buf, sizeof buf, " [over budget %.0fs]", budget_sec);
        detail += buf;
    }
    std::printf("%s criterion %2d (%6.2fs): %s%s%s\n", ok ? "PASS" : "FAIL", id, elapsed,
                what.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++g_failures;
}

EmpiricalMeasure uniform_cloud(std::uint64_t stream_seed, std::size_t m, double center,
                               double half_width) {
    NoiseStream rng(stream_seed);
    std::vector<double> xs(m);
    for (std::size_t i = 0; i < m; ++i)
        xs[i] = center + half_width * (2.0 * rng.uniform(i, 0, 0) - 1.0);
    return EmpiricalMeasure::from_scalars(xs);
}

EmpiricalMeasure normal_cloud(std::uint64_t stream_seed, std::size_t m, double center,
                              double spread) {
    NoiseStream rng(stream_seed);
    std::vector<double> xs(m);
    for (std::size_t i = 0; i < m; ++i) xs[i] = center + spread * rng.normal(i, 0, 0);
    return EmpiricalMeasure::from_scalars(xs);
}

EmpiricalMeasure random_cloud(const NoiseStream& rng, std::uint64_t tag, std::size_t m,
                              double radius) {
    std::vector<double> xs(m);
    for (std::size_t i = 0; i < m; ++i) xs[i] = radius * (2.0 * rng.uniform(tag, i, 60) - 1.0);
    return EmpiricalMeasure::from_scalars(xs);
}

double enumerate_cost(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                      const CostFunction& cost) {
    std::size_t m = a.size();
    std::vector<std::size_t> perm(m);
    for (std::size_t i = 0; i < m; ++i) perm[i] = i;
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) total += cost.eval(a.point(i), b.point(perm[i]));
        best = std::min(best, total / static_cast<double>(m));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

bool run_cli(const std::string& cli, const std::string& args) {
    std::string cmd = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
}

bool dirs_byte_identical(const fs::path& a, const fs::path& b, std::string& detail) {
    std::vector<fs::path> rel;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a));
    std::size_t count_b = 0;
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) ++count_b;
    if (rel.empty() || count_b != rel.size()) {
        detail = "file sets differ";
        return false;
    }
    for (const auto& r : rel) {
        std::ifstream fa(a / r, std::ios::binary), fb(b / r, std::ios::binary);
        std::stringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        if (!fa || !fb || sa.str() != sb.str()) {
            detail = "mismatch at " + r.string();
            return false;
        }
    }
    detail = std::to_string(rel.size()) + " files identical";
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli = argc > 1 ? argv[1] : "";

    criterion(1, "ex5_2 generator matches its closed form to 1e-9 at 200 points", 1.0,
              [](std::string& detail) {
                  const NamedSystem& sys = builtin("ex5_2");
                  NoiseStream rng(1001);
                  double worst = 0.0;
                  for (std::uint64_t k = 0; k < 200; ++k) {
                      EmpiricalMeasure mu = random_cloud(rng, k, 1 + k % 8, 2.0);
                      Vec x{2.0 * (2.0 * rng.uniform(k, 99, 0) - 1.0)};
                      double lv = generator_L(sys.V, sys.field, 0.0, x, mu);
                      double d = x[0] - mean1d(mu);
                      double closed = -1.5 * d * d * d * d;
                      worst = std::max(worst,
                                       std::abs(lv - closed) / (1.0 + std::abs(closed)));
                  }
                  detail = "worst rel err " + std::to_string(worst);
                  return worst <= 1e-9;
              });

    criterion(2, "Lions derivatives by finite differences match analytic to 1e-4", 5.0,
              [](std::string& detail) {
                  double worst = 0.0;
                  for (const auto& name : builtin_names()) {
                      const NamedSystem& sys = builtin(name);
                      NoiseStream rng(1002);
                      for (std::uint64_t k = 0; k < 100; ++k) {
                          std::size_t m = 1 + k % 6;
                          EmpiricalMeasure mu = random_cloud(rng, k, m, 1.5);
                          Vec x{1.5 * (2.0 * rng.uniform(k, 99, 0) - 1.0)};
                          std::size_t j = k % m;
                          double fd = lions_derivative_fd(sys.V, x, mu, j)[0];
                          double an = sys.V.lions(x, mu, mu.point(j))[0];
                          worst = std::max(worst, std::abs(fd - an) / (1.0 + std::abs(an)));
                          double fd2 = lions_ygrad_fd(sys.V, x, mu, j)(0, 0);
                          double an2 = sys.V.lions_ygrad(x, mu, mu.point(j))(0, 0);
                          worst = std::max(worst, std::abs(fd2 - an2) / (1.0 + std::abs(an2)));
                      }
                  }
                  detail = "worst rel err " + std::to_string(worst);
                  return worst <= 1e-4;
              });

    criterion(3, "ex5_2 Lyapunov decay rate lands in [5.4, 6.6]", 60.0, [](std::string& detail) {
        const NamedSystem& sys = builtin("ex5_2");
        SimConfig cfg;
        cfg.dt = 1e-3;
        cfg.steps = 1500;
        cfg.particles = 10000;
        cfg.seed = 9;
        cfg.record_every = 25;
        DecayExperiment exp = decay_experiment(
            sys.V, sys.field, uniform_cloud(123, cfg.particles, 1.0, 0.5), cfg, 0.1, 0.6);
        detail = "rate " + std::to_string(exp.fit.rate);
        return exp.fit.rate >= 5.4 && exp.fit.rate <= 6.6;
    });

    criterion(4, "ex5_1 Ito balance closes within 3 std errors over [0, 0.5]", 60.0,
              [](std::string& detail) {
                  const NamedSystem& sys = builtin("ex5_1");
                  SimConfig cfg;
                  cfg.dt = 1e-3;
                  cfg.steps = 500;
                  cfg.particles = 10000;
                  cfg.seed = 2;
                  cfg.record_every = 25;
                  ItoBalanceReport rep = ito_balance(
                      sys.V, sys.field, normal_cloud(321, cfg.particles, 0.5, 0.2), cfg, 256);
                  detail = "residual " + std::to_string(rep.residual) + ", se " +
                           std::to_string(rep.std_error);
                  return rep.ok;
              });

    criterion(5, "all built-in certificates hold on 1000 sampled inputs each", 30.0,
              [](std::string& detail) {
                  for (const auto& name : builtin_names()) {
                      const NamedSystem& sys = builtin(name);
                      CertSampler sampler;
                      sampler.seed = 5;
                      auto t0 = std::chrono::steady_clock::now();
                      const CoefficientField* bar = sys.bar_field ? &*sys.bar_field : nullptr;
                      const TwoPointFunction* v2 = sys.V2 ? &*sys.V2 : nullptr;
                      CertReport rep = check_certificate(sys.field, bar, &sys.V, v2,
                                                         sys.certificate, sampler, 1000);
                      double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                                t0)
                                      .count();
                      if (!rep.passed || !rep.violations.empty()) {
                          detail = name + " violated";
                          return false;
                      }
                      if (dt > 10.0) {
                          detail = name + " over its 10s budget";
                          return false;
                      }
                  }
                  detail = "zero violations";
                  return true;
              });

    criterion(6, "transport optimizers match permutation enumeration on 500 instances", 10.0,
              [](std::string& detail) {
                  NoiseStream rng(1006);
                  auto u2 = CostFunction::from_difference_1d([](double u) { return u * u; }, true);
                  auto u4 = CostFunction::from_difference_1d(
                      [](double u) { return u * u * u * u; }, true);
                  double worst = 0.0;
                  for (std::uint64_t k = 0; k < 500; ++k) {
                      std::size_t m = 2 + k % 6;  // up to 7
                      EmpiricalMeasure a = random_cloud(rng, 2 * k, m, 2.0);
                      EmpiricalMeasure b = random_cloud(rng, 2 * k + 1, m, 2.0);
                      double cases[4][2] = {
                          {wasserstein_p(a, b, 1.0), enumerate_cost(a, b, CostFunction::power(1.0))},
                          {wasserstein_p(a, b, 2.0),
                           std::sqrt(enumerate_cost(a, b, CostFunction::power(2.0)))},
                          {quasi_wasserstein(a, b, u2), enumerate_cost(a, b, u2)},
                          {quasi_wasserstein(a, b, u4), enumerate_cost(a, b, u4)},
                      };
                      for (auto& c : cases)
                          worst = std::max(worst, std::abs(c[0] - c[1]) / (1.0 + std::abs(c[1])));
                  }
                  detail = "worst rel err " + std::to_string(worst);
                  return worst <= 1e-12;
              });

    criterion(7, "W_p dominates the Prohorov power bound on 100 pairs, p in {1, 2}", 5.0,
              [](std::string& detail) {
                  NoiseStream rng(1007);
                  double min_margin = std::numeric_limits<double>::infinity();
                  for (std::uint64_t k = 0; k < 100; ++k) {
                      std::size_t m = 2 + k % 7;
                      EmpiricalMeasure a = random_cloud(rng, 2 * k, m, 2.0);
                      EmpiricalMeasure b = random_cloud(rng, 2 * k + 1, m, 2.0);
                      for (double p : {1.0, 2.0}) {
                          ProhorovReport rep = check_prohorov_bound(a, b, p);
                          min_margin = std::min(min_margin, rep.margin);
                          if (!rep.ok) {
                              detail = "bound violated";
                              return false;
                          }
                      }
                  }
                  detail = "min margin " + std::to_string(min_margin);
                  return true;
              });

    criterion(8, "stopped and truncated-field constructions agree bit-exactly (n = 2)", 10.0,
              [](std::string& detail) {
                  const NamedSystem& sys = builtin("ex5_1");
                  TruncationRadius n(2.0);
                  SimConfig cfg;
                  cfg.dt = 1e-3;
                  cfg.steps = 500;
                  cfg.particles = 1000;
                  cfg.seed = 11;
                  cfg.record_every = 1;
                  EmpiricalMeasure init = normal_cloud(99, cfg.particles, 0.5, 0.5);
                  StoppedPath stopped = stopped_simulate(sys.field, init, cfg, n);
                  Trajectory trunc = simulate(truncated_field(sys.field, n), init, cfg);
                  std::size_t frozen = 0;
                  for (std::size_t i = 0; i < cfg.particles; ++i) {
                      std::size_t tau = stopped.tau_index[i];
                      if (tau != StoppedPath::kNever) ++frozen;
                      for (std::size_t k = 0; k < trunc.clouds.size(); ++k) {
                          const Vec& got = stopped.path.clouds[k].point(i);
                          const Vec& want = (tau != StoppedPath::kNever && k > tau)
                                                ? stopped.path.clouds[tau].point(i)
                                                : trunc.clouds[k].point(i);
                          if (got != want) {
                              detail = "particle " + std::to_string(i) + " diverges at step " +
                                       std::to_string(k);
                              return false;
                          }
                      }
                  }
                  detail = std::to_string(frozen) + "/1000 particles stopped";
                  return frozen > 0;
              });

    criterion(9, "semigroup identity P_{s+t} = P_s P_t holds within 3 std errors", 120.0,
              [](std::string& detail) {
                  const NamedSystem& sys = builtin("ex5_3");
                  SimConfig cfg;
                  cfg.dt = 2.5e-3;
                  cfg.particles = 1000;
                  cfg.seed = 3;
                  auto f = [](const Vec& x, const EmpiricalMeasure&) { return std::tanh(x[0]); };
                  SemigroupReport rep =
                      check_semigroup(f, sys.field, *sys.bar_field, Vec{1.0},
                                      EmpiricalMeasure::dirac1d(0.0), 0.25, 0.25, cfg, 64, 8);
                  detail = "difference " + std::to_string(rep.difference) + ", se " +
                           std::to_string(rep.combined_std_error);
                  return rep.ok;
              });

    criterion(10, "squared-moment Feller modulus holds for mu_n = delta_{1/n}", 60.0,
              [](std::string& detail) {
                  const NamedSystem& sys = builtin("ex5_2");
                  SimConfig cfg;
                  cfg.dt = 1e-3;
                  cfg.steps = 500;
                  cfg.particles = 256;
                  cfg.seed = 7;
                  std::vector<EmpiricalMeasure> seq;
                  for (double n : {1.0, 2.0, 4.0, 8.0})
                      seq.push_back(EmpiricalMeasure::dirac1d(1.0 / n, cfg.particles));
                  FellerReport rep = feller_modulus(
                      sys.field, seq, EmpiricalMeasure::dirac1d(0.0, cfg.particles), 0.5, cfg);
                  double worst = 0.0;
                  for (const auto& e : rep.entries)
                      worst = std::max(worst, e.bound > 0 ? e.moment_sq / e.bound : 0.0);
                  detail = "worst moment/bound " + std::to_string(worst);
                  return rep.ok;
              });

    criterion(11, "two-point contraction stays below the certified envelope to t = 2", 120.0,
              [](std::string& detail) {
                  const NamedSystem& sys = builtin("ex5_3");
                  SimConfig cfg;
                  cfg.dt = 1e-3;
                  cfg.steps = 2000;
                  cfg.particles = 2000;
                  cfg.seed = 5;
                  cfg.record_every = 100;
                  ContractionReport rep = contraction_experiment(
                      sys.field, *sys.bar_field, *sys.V2, Vec{1.0}, EmpiricalMeasure::dirac1d(1.0),
                      Vec{0.0}, EmpiricalMeasure::dirac1d(0.0), sys.certificate, cfg);
                  if (rep.first_violation_time)
                      detail = "first violation at t = " + std::to_string(*rep.first_violation_time);
                  else
                      detail = std::to_string(rep.entries.size()) + " checkpoints below bound";
                  return rep.ok;
              });

    criterion(12, "CLI outputs are byte-identical across worker counts", 300.0,
              [&cli](std::string& detail) {
                  if (cli.empty()) {
                      detail = "cli path not provided";
                      return false;
                  }
                  fs::path root = fs::temp_directory_path() / "mvlab-acceptance-12";
                  fs::remove_all(root);
                  fs::create_directories(root);
                  std::ofstream(root / "small.toml")
                      << "[sim]\nparticles = 1000\nsteps = 300\nrecord_every = 25\n";
                  std::ofstream(root / "contraction.toml")
                      << "[sim]\nparticles = 500\nsteps = 500\nrecord_every = 50\n";
                  const std::string runs[] = {
                      "simulate --system ex5_1 --seed 1 --config " + (root / "small.toml").string(),
                      "decay --seed 9 --config " + (root / "small.toml").string(),
                      "certify --system ex5_3 --seed 5",
                      "transport --seed 4",
                      "invariant --seed 6 --config " + (root / "small.toml").string(),
                      "contraction --seed 5 --config " + (root / "contraction.toml").string(),
                  };
                  for (const auto& r : runs) {
                      if (!run_cli(cli, r + " --workers 1 --out " + (root / "w1").string()) ||
                          !run_cli(cli, r + " --workers 4 --out " + (root / "w4").string())) {
                          detail = "cli run failed: " + r;
                          return false;
                      }
                  }
                  bool ok = dirs_byte_identical(root / "w1", root / "w4", detail);
                  fs::remove_all(root);
                  return ok;
              });

    if (g_failures == 0) {
        std::printf("all 12 acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria FAILED\n", g_failures);
    return 1;
}
