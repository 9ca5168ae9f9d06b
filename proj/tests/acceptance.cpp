// Acceptance harness: exercises each shipped guarantee end to end and prints
// one [PASS]/[FAIL] line per criterion. The command-line binary under test is
// passed as argv[1] (used by the determinism criterion). Exit status is the
// number of failed criteria, clamped to 1.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "msde/builtin_models.hpp"
#include "msde/cutoff.hpp"
#include "msde/estimators.hpp"
#include "msde/malliavin.hpp"
#include "msde/paths.hpp"

namespace fs = std::filesystem;
using msde::CutoffFamily;
using msde::TimeGrid;
using msde::Vec;

namespace {

int g_fail = 0;
std::string g_cli;

void report(const char* id, bool pass, const std::string& detail) {
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  if (!pass) ++g_fail;
}

template <typename Fn>
void criterion(const char* id, Fn fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct LinearRun {
  msde::ModelSpec model = msde::make_ou({});
  CutoffFamily family{1.0, 1};
  TimeGrid grid{1.0, 1000};
  msde::NoisePath noise;
  msde::PathSolution path;
  msde::TruncatedModel tm;
  msde::FirstDerivField first;
  double build_seconds = 0.0;

  LinearRun()
      : noise(msde::sample_noise(grid, 1, 424242)),
        path(msde::euler_original(model, family, noise)),
        tm(msde::make_truncated(model, path.settled_level, family)) {
    first = msde::propagate_first(tm, path, noise);
  }
};

int run_cli(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli = argv[1];

  const auto lin_t0 = std::chrono::steady_clock::now();
  LinearRun lin;
  lin.build_seconds = seconds_since(lin_t0);

  criterion("C1", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr double kTol = 5e-3;
    constexpr double kBudget = 10.0;
    double worst = 0.0;
    for (long r = 0; r <= lin.grid.steps; ++r) {
      const double exact = std::exp(-(1.0 - lin.grid.time(r)));
      worst = std::max(worst, std::abs(lin.first.at(r, lin.grid.steps)(0, 0) -
                                       exact));
    }
    const double elapsed = lin.build_seconds + seconds_since(t0);
    const bool pass = worst <= kTol && elapsed < kBudget;
    report("C1", pass,
           fmt("linear-model derivative field vs exponential kernel: max gap "
               "%.3e (tol %.0e), %.2fs (budget %.0fs)",
               worst, kTol, elapsed, kBudget));
  });

  criterion("C2", [&] {
    constexpr double kTol = 1e-2;
    const double exact = (1.0 - std::exp(-2.0)) / 2.0;
    const double got = msde::hnorm_sq(lin.first, lin.grid.steps);
    const double gap = std::abs(got - exact);
    report("C2", gap <= kTol,
           fmt("squared Hilbert norm %.6f vs closed form %.6f: gap %.3e "
               "(tol %.0e)",
               got, exact, gap, kTol));
  });

  criterion("C3", [&] {
    constexpr double kTol = 1e-2;
    const auto h = msde::CMDirection::constant(Vec::Ones(1));
    const auto rep = msde::cameron_martin_check(lin.tm, lin.noise, h, 1e-4);
    const double exact = 1.0 - std::exp(-1.0);
    const double rhs_gap = std::abs(rep.rhs[0] - exact) / exact;

    const msde::ModelSpec cubic = msde::make_cubic({});
    const CutoffFamily cubic_family(cubic.xi, 1);
    const TimeGrid grid(1.0, 1000);
    std::vector<double> errs;
    for (int s = 0; s < 100; ++s) {
      const auto noise = msde::sample_noise(grid, 1, 5000 + s);
      const auto path = msde::euler_original(cubic, cubic_family, noise);
      const auto tm =
          msde::make_truncated(cubic, path.settled_level, cubic_family);
      errs.push_back(msde::cameron_martin_check(tm, noise, h, 1e-4).rel_err);
    }
    std::nth_element(errs.begin(), errs.begin() + errs.size() / 2, errs.end());
    const double median = errs[errs.size() / 2];

    const bool pass = rhs_gap <= kTol && rep.rel_err <= kTol && median <= kTol;
    report("C3", pass,
           fmt("drift-shift pairing: linear rhs gap %.3e, rel err %.3e; "
               "superlinear median rel err %.3e over 100 seeds (tol %.0e)",
               rhs_gap, rep.rel_err, median, kTol));
  });

  criterion("C4", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr double kBudget = 30.0;
    const msde::ModelSpec cubic = msde::make_cubic({});
    const CutoffFamily family(cubic.xi, 1);
    const TimeGrid grid(1.0, 500);
    const auto tm1 = msde::make_truncated(cubic, 1, family);
    const auto tm2 = msde::make_truncated(cubic, 2, family);
    long mismatched_seeds = 0;
    for (int s = 0; s < 1000; ++s) {
      const auto noise = msde::sample_noise(grid, 1, 9000 + s);
      const auto p1 = msde::euler_truncated(tm1, noise);
      const auto p2 = msde::euler_truncated(tm2, noise);
      const auto tau = msde::stopping_time(p1, 1, cubic.xi);
      const long limit = tau.has_value() ? *tau : grid.steps;
      bool same = true;
      for (long k = 0; k <= limit; ++k)
        same = same && (p1.states(k, 0) == p2.states(k, 0));
      if (!same) ++mismatched_seeds;
    }
    const auto conv = msde::convergence_report(cubic, family, {1, 2, 4}, 8,
                                               grid, 2.0, 1000, 9000);
    const double elapsed = seconds_since(t0);
    const bool pass =
        mismatched_seeds == 0 && conv.settled_gaps_zero && elapsed < kBudget;
    report("C4", pass,
           fmt("level nesting: %ld/1000 seeds deviate before exit, settled "
               "gaps all zero: %s, %.2fs (budget %.0fs)",
               mismatched_seeds, conv.settled_gaps_zero ? "yes" : "no",
               elapsed, kBudget));
  });

  criterion("C5", [&] {
    constexpr double kFdTol = 1e-4;
    const msde::ModelSpec ou3 = msde::make_ou({.dim = 3, .x0 = {1, 1, 1}});
    const CutoffFamily family(ou3.xi, 3);
    const auto rep = msde::certify_uniform_bounds(family, ou3, {1, 2},
                                                  {1, 2, 3, 4, 5, 6}, 10000,
                                                  777);
    const double fd = rep.measurements.at("grad_fd_worst_rel");
    const bool pass = rep.passed && fd <= kFdTol;
    report("C5", pass,
           fmt("cutoff certification over levels 1..6: %s, worst gradient FD "
               "rel gap %.3e (tol %.0e)",
               rep.passed ? "passed" : "violated", fd, kFdTol));
  });

  criterion("C6", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr double kBudget = 120.0;
    const msde::ModelSpec cubic = msde::make_cubic({});
    const CutoffFamily family(cubic.xi, 1);
    const auto rep = msde::uniform_bound_report(
        cubic, family, {1, 2, 3, 4, 5}, TimeGrid(1.0, 500), 2.0, 10000, 1, 64);
    const double elapsed = seconds_since(t0);
    const bool pass = rep.verdict && elapsed < kBudget;
    report("C6", pass,
           fmt("uniform moment bound across levels 1..5: verdict %s, max "
               "relative sup increase %.3e, %.1fs (budget %.0fs)%s%s",
               rep.verdict ? "holds" : "violated", rep.max_rel_increase,
               elapsed, kBudget, rep.first_violation.empty() ? "" : "; ",
               rep.first_violation.c_str()));
  });

  criterion("C7", [&] {
    const CutoffFamily ou_family(1.0, 1);
    const msde::ModelSpec ou = msde::make_ou({});
    const auto ou_tm = msde::make_truncated(ou, 8, ou_family);
    const TimeGrid ou_grid(1.0, 100);
    const auto ou_noise = msde::sample_noise(ou_grid, 1, 31);
    const auto ou_path = msde::euler_truncated(ou_tm, ou_noise);
    const auto ou_first = msde::propagate_first(ou_tm, ou_path, ou_noise);
    const auto ou_second =
        msde::propagate_second(ou_tm, ou_path, ou_noise, ou_first, {50, 100});
    double affine_max = 0.0;
    for (long tout : {50L, 100L})
      for (long r = 0; r <= tout; ++r)
        for (long tau = 0; tau <= tout; ++tau)
          affine_max =
              std::max(affine_max, ou_second.at(r, tau, tout).max_abs());

    const msde::ModelSpec cubic = msde::make_cubic({});
    const CutoffFamily cubic_family(cubic.xi, 1);
    auto symmetry_gap = [&](long steps) {
      const TimeGrid grid(1.0, steps);
      const auto noise = msde::sample_noise(grid, 1, 77);
      const auto path = msde::euler_original(cubic, cubic_family, noise);
      const auto tm =
          msde::make_truncated(cubic, path.settled_level, cubic_family);
      const auto first = msde::propagate_first(tm, path, noise);
      const auto second =
          msde::propagate_second(tm, path, noise, first, {steps});
      double gap = 0.0;
      for (long r = 0; r <= steps; ++r)
        for (long tau = 0; tau < r; ++tau)
          gap = std::max(gap, std::abs(second.at(r, tau, steps)(0, 0, 0) -
                                       second.at(tau, r, steps)(0, 0, 0)));
      return gap;
    };
    const double gap250 = symmetry_gap(250);
    bool symmetry_ok = gap250 == 0.0;
    double gap500 = 0.0;
    if (!symmetry_ok) {
      gap500 = symmetry_gap(500);
      symmetry_ok = gap500 <= 0.6 * gap250;
    }

    const msde::ModelSpec coupled = msde::make_coupled({});
    const CutoffFamily co_family(coupled.xi, 2);
    const auto co_tm = msde::make_truncated(coupled, 8, co_family);
    const TimeGrid co_grid(1.0, 80);
    const auto co_noise = msde::sample_noise(co_grid, 2, 41);
    const auto co_path = msde::euler_truncated(co_tm, co_noise);
    const auto co_first = msde::propagate_first(co_tm, co_path, co_noise);
    const auto co_second =
        msde::propagate_second(co_tm, co_path, co_noise, co_first, {30, 60});
    bool seeds_bitwise = true;
    for (long tout : {30L, 60L}) {
      for (long other = 0; other <= tout; ++other) {
        const auto seed_a =
            msde::second_initial(co_tm, co_path, co_first, other, tout);
        const auto seed_b =
            msde::second_initial(co_tm, co_path, co_first, tout, other);
        seeds_bitwise = seeds_bitwise &&
                        co_second.at(other, tout, tout).data() == seed_a.data() &&
                        co_second.at(tout, other, tout).data() == seed_b.data();
      }
    }

    const bool pass = affine_max == 0.0 && symmetry_ok && seeds_bitwise;
    report("C7", pass,
           fmt("second-order field: affine max %.1e (want exact 0), pair "
               "symmetry gap %.1e%s, start tensors bitwise: %s",
               affine_max, gap250,
               gap250 == 0.0
                   ? ""
                   : fmt(" (halved-step gap %.1e, want <= 0.6x)", gap500)
                         .c_str(),
               seeds_bitwise ? "yes" : "no"));
  });

  criterion("C8", [&] {
    const msde::ModelSpec cubic = msde::make_cubic({});
    const CutoffFamily family(cubic.xi, 1);
    const TimeGrid grid(1.0, 250);
    const auto noise = msde::sample_noise(grid, 1, 88);
    const auto path = msde::euler_original(cubic, family, noise);
    const auto tm = msde::make_truncated(cubic, path.settled_level, family);
    const auto first = msde::propagate_first(tm, path, noise);
    const auto second = msde::propagate_second(tm, path, noise, first, {120});

    std::mt19937 rng(2024);
    long bad = 0;
    for (int k = 0; k < 200; ++k) {
      std::uniform_int_distribution<long> pick_r(1, 250);
      const long r = pick_r(rng);
      std::uniform_int_distribution<long> pick_t(0, r - 1);
      const long t = pick_t(rng);
      if (first.at(r, t).cwiseAbs().maxCoeff() != 0.0) ++bad;

      std::uniform_int_distribution<long> pick_late(121, 250);
      std::uniform_int_distribution<long> pick_any(0, 250);
      if (second.at(pick_late(rng), pick_any(rng), 120).max_abs() != 0.0)
        ++bad;
      if (second.at(pick_any(rng), pick_late(rng), 120).max_abs() != 0.0)
        ++bad;
    }
    report("C8", bad == 0,
           fmt("randomized future-perturbation audits: %ld/600 lookups "
               "nonzero (want 0)",
               bad));
  });

  criterion("C9", [&] {
    if (g_cli.empty()) {
      report("C9", false, "command-line binary path not supplied");
      return;
    }
    const fs::path base =
        fs::temp_directory_path() / ("msde_acc_" + std::to_string(::getpid()));
    const fs::path da = base / "a", db = base / "b", dc = base / "c";
    fs::remove_all(base);
    fs::create_directories(da);
    fs::create_directories(db);
    fs::create_directories(dc);
    const int ea =
        run_cli("run cubic_full --seed 1 --threads 1 --out " + da.string());
    const int eb =
        run_cli("run cubic_full --seed 1 --threads 1 --out " + db.string());
    const int ec = run_cli("run cubic_full --threads 4 --out " + dc.string());
    long csvs = 0;
    long unequal = 0;
    if (ea == 0 && eb == 0 && ec == 0) {
      for (const auto& entry : fs::directory_iterator(da)) {
        if (entry.path().extension() != ".csv") continue;
        ++csvs;
        const std::string body = slurp(entry.path());
        if (body != slurp(db / entry.path().filename())) ++unequal;
        if (body != slurp(dc / entry.path().filename())) ++unequal;
      }
    }
    const bool pass =
        ea == 0 && eb == 0 && ec == 0 && csvs >= 1 && unequal == 0;
    report("C9", pass,
           fmt("replayed full run: exit codes %d/%d/%d, %ld result files "
               "compared, %ld differ (thread counts 1 and 4)",
               ea, eb, ec, csvs, unequal));
    if (pass) fs::remove_all(base);
  });

  std::printf("%d of 9 criteria failed\n", g_fail);
  return g_fail == 0 ? 0 : 1;
}
