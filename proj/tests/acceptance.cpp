// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "fcl/experiments.hpp"

using namespace fcl;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome experiment(ExperimentConfig cfg) {
  ExperimentResult r = run_experiment(cfg);
  return {r.pass, r.report.dump()};
}

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = limit_s <= 0.0 || secs < limit_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("criterion %2d %-31s %s  (%.2f s%s)\n", id, title, pass ? "PASS" : "FAIL", secs,
              in_time ? "" : ", over time limit");
  if (!pass) std::printf("    %s\n", o.detail.substr(0, 2000).c_str());
  std::fflush(stdout);
}

}  // namespace

int main() {
  criterion(1, "de Rham Euler characteristic", 1.0, [] {
    Outcome s = experiment({.name = "derham", .surface = "sphere"});
    Outcome t = experiment({.name = "derham", .surface = "torus"});
    return Outcome{s.pass && t.pass, s.detail + " " + t.detail};
  });
  criterion(2, "cone counterexample", 0.0, [] { return experiment({.name = "counterexample", .seed = kSeed}); });
  criterion(3, "cone decomposition suite", 5.0,
            [] { return experiment({.name = "cone-props", .grid = 100, .seed = kSeed}); });
  criterion(4, "Hodge parametrix", 0.0, [] { return experiment({.name = "hodge", .grid = 100, .seed = kSeed}); });
  criterion(5, "Toeplitz lift", 0.0, [] { return experiment({.name = "lift", .grid = 100, .seed = kSeed}); });
  criterion(6, "quasicomplex lift", 0.0, [] { return experiment({.name = "quasilift", .seed = kSeed}); });
  criterion(7, "circle Toeplitz index", 2.0, [] {
    Outcome all{true, ""};
    for (long k = -5; k <= 5; ++k) {
      Outcome o = experiment({.name = "circle-index", .n = 128, .k = k});
      all.pass = all.pass && o.pass;
      if (!o.pass) all.detail += o.detail + " ";
    }
    return all;
  });
  criterion(8, "Cauchy-Riemann boundary symbol", 0.0, [] {
    Outcome all{true, ""};
    for (long n : {2L, 8L, 32L}) {
      Outcome o = experiment({.name = "cr-symbol", .n = n});
      all.pass = all.pass && o.pass;
      if (!o.pass) all.detail += o.detail + " ";
    }
    return all;
  });
  criterion(9, "Dolbeault exactness scan", 60.0, [] {
    return experiment({.name = "dolbeault-scan", .n = 32, .grid = 1000, .tol = 1e-8, .seed = kSeed});
  });
  criterion(10, "Bott clutching", 0.0, [] { return experiment({.name = "bott", .n = 32, .grid = 512}); });
  criterion(11, "complementation", 0.0, [] { return experiment({.name = "complement", .seed = kSeed}); });
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
