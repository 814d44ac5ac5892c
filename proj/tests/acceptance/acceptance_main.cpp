// Runs the ten acceptance checks and prints one PASS/FAIL line for each.
// Exit status is nonzero when any check fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "hvacd/evaluation.hpp"
#include "hvacd/finetune.hpp"
#include "hvacd/ica.hpp"
#include "hvacd/pipeline.hpp"
#include "hvacd/report.hpp"
#include "hvacd/synth.hpp"
#include "oracles.hpp"

using namespace hvacd;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  failures += o.pass ? 0 : 1;
  std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

BivariateGaussian gauss(const oracle::Gauss2& g) { return {g.mu, g.sigma}; }

Outcome kl_monte_carlo() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::vector<std::pair<oracle::Gauss2, oracle::Gauss2>> pairs;
  for (int i = 0; i < 10; ++i) {
    const oracle::Gauss2 p = oracle::random_gauss2(rng);
    const oracle::Gauss2 q = oracle::random_gauss2(rng);
    pairs.emplace_back(p, q);
  }
  pairs.push_back({{{16.45, 3.22}, (Eigen::Matrix2d() << 91.30, 10.56, 10.56, 3.75).finished()},
                   {{15.40, 3.16}, (Eigen::Matrix2d() << 79.99, 13.12, 13.12, 8.02).finished()}});
  double worst = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double closed = kl_bivariate_gaussian(gauss(pairs[i].first), gauss(pairs[i].second));
    const double mc = oracle::kl_monte_carlo(pairs[i].first, pairs[i].second, 1'000'000, 100 + i);
    worst = std::max(worst, std::abs(closed - mc) / mc);
  }
  const double secs = seconds_since(t0);
  return {worst <= 0.02 && secs < 10.0, fmt("11 pairs, worst relative gap %.4f, %.2f s", worst, secs)};
}

Outcome ica_recovery() {
  const auto t0 = Clock::now();
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const oracle::IcaEnsemble e = oracle::ica_ensemble(seed);
    IcaOptions o;
    o.seed = seed;
    const IcaModel m = run_ica(e.residuals, o);
    const Vector mean = e.residuals.rowwise().mean();
    const HvacIcaEstimate est =
        select_hvac(m, std::span<const double>(e.temps.data(), e.temps.size()), mean);
    good += oracle::pearson_loops(est.hvac, e.hvac) >= 0.95;
  }
  const double secs = seconds_since(t0);
  return {good >= 95 && secs < 30.0, fmt("%d of 100 seeds with corr >= 0.95, %.2f s", good, secs)};
}

Outcome whitening() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    Matrix r(96, 10);
    for (int j = 0; j < r.size(); ++j) r.data()[j] = g(rng);
    const Whitened w = center_and_whiten(r);
    worst = std::max(worst, (oracle::covariance_loops(w.data) - Matrix::Identity(2, 2)).norm());
  }
  return {worst <= 1e-8, fmt("50 ensembles, worst Frobenius error %.3g", worst)};
}

Outcome gradient_check() {
  // Realistic day: one hot and eight mild days from a synthetic household.
  const Date start = parse_date("2023-07-01");
  const HouseholdSpec spec = random_household_spec(61);
  TemperatureMatrix hot = generate_temperature(1, WeatherProfile::Hot, 62, start);
  TemperatureMatrix mild = generate_temperature(8, WeatherProfile::Mild, 63, start + std::chrono::days{1});
  TemperatureMatrix all;
  all.temps.resize(24, 9);
  all.temps << hot.temps, mild.temps;
  all.day_dates = hot.day_dates;
  all.day_dates.insert(all.day_dates.end(), mild.day_dates.begin(), mild.day_dates.end());
  const SyntheticHousehold h = generate_household(spec, all);
  FineTuneConfig cfg;
  FineTuneProblem p;
  p.total = h.total.samples.col(0);
  p.ica_hvac = 0.8 * h.hvac.samples.col(0);
  p.mild = h.total.samples.rightCols(8);
  p.temps = all.temps.col(0);
  p.mild_stats = estimate_base_stats(p.mild, cfg.diurnal, cfg.nocturnal);

  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int point = 0; point < 10; ++point) {
    FineTuneProblem q = p;
    if (point >= 5) {
      for (int i = 0; i < 12; ++i) q.candidate_pool.emplace_back(10.0 + 2.0 * g(rng), 4.0 + g(rng));
    }
    const FineTuneObjective obj(q, cfg);
    FineTuneVars v;
    v.alpha = 1.0 + 0.2 * g(rng);
    v.beta = Vector::Constant(8, 0.125) + 0.02 * Vector::NullaryExpr(8, [&] { return g(rng); });
    v.theta_h = 0.2 * Vector::NullaryExpr(96, [&] { return g(rng); });
    v.theta_b = 0.2 * Vector::NullaryExpr(96, [&] { return g(rng); });
    v.gamma1 = 0.05 + 0.01 * g(rng);
    v.gamma2 = 0.0005 * (1.0 + 0.1 * g(rng));
    const Vector x = obj.pack(v);
    Vector grad;
    obj.value_and_gradient(x, 10.0, grad);
    const Vector fd = oracle::fd_gradient([&](const Vector& y) { return obj.value(y, 10.0); }, x, 1e-6);
    worst = std::max(worst, (grad - fd).norm() / std::max(1.0, fd.norm()));
  }
  return {worst <= 1e-4, fmt("10 points, worst relative error %.3g", worst)};
}

// The 20 x 30 corpus run in-process, shared by criteria 4, 6, 7 and 8.
struct CorpusRun {
  std::vector<SyntheticCustomer> corpus;
  PipelineResult result;
  EvaluationResult eval;
  double seconds = 0.0;
};

CorpusRun run_corpus() {
  CorpusRun run;
  PipelineConfig cfg;
  cfg.synth.seed = cfg.seed;
  run.corpus = generate_corpus(cfg.synth);
  std::vector<CustomerInput> inputs;
  for (const SyntheticCustomer& c : run.corpus) inputs.push_back({c.id, c.data.total, c.temps, {}});
  const auto t0 = Clock::now();
  run.result = run_pipeline(inputs, cfg);
  run.seconds = seconds_since(t0);

  std::vector<CustomerRecords> records;
  std::vector<DailyLoadMatrix> truth;
  for (std::size_t c = 0; c < run.result.customers.size(); ++c) {
    CustomerRecords rec;
    rec.id = run.result.customers[c].id;
    for (const HotDayResult& d : run.result.customers[c].days) {
      rec.days.push_back({d.date, d.raw_total, d.total, d.average_hvac, d.ica_hvac, d.result.hvac_hat,
                          d.result.base_hat});
    }
    records.push_back(std::move(rec));
    truth.push_back(run.corpus[c].data.hvac);
  }
  run.eval = evaluate_records(records, truth, cfg);
  return run;
}

Outcome constraints(const CorpusRun& run) {
  const double eps = FineTuneConfig{}.epsilon_kwh;
  int feasible = 0, total = 0, ok = 0;
  for (const CustomerResult& c : run.result.customers) {
    for (const HotDayResult& d : c.days) {
      ++total;
      const DisaggregationResult& r = d.result;
      if (!r.feasible) continue;
      ++feasible;
      bool good = (r.hvac_hat.array() >= 0.0).all() && (r.hvac_hat.array() <= d.total.array()).all() &&
                  (r.base_hat.array() >= 0.0).all() && (r.base_hat.array() <= d.total.array()).all();
      for (int k = 0; k < 24; ++k) {
        const double hour = r.hvac_hat.segment(4 * k, 4).sum() / 4.0;
        good = good && std::abs(hour - r.hourly_hvac_bound[k]) <= eps + 1e-6;
      }
      ok += good;
    }
  }
  return {feasible > 0 && ok == feasible,
          fmt("%d of %d feasible-flagged days satisfy every constraint (%d days total, %.1f s pipeline)", ok,
              feasible, total, run.seconds)};
}

Outcome ordering(const CorpusRun& run) {
  const auto& m = run.eval.methods;
  const bool pass = m[kAverage].mean_nmae > m[kIca].mean_nmae && m[kIca].mean_nmae > m[kFineTuned].mean_nmae &&
                    m[kFineTuned].std_nmae < m[kIca].std_nmae;
  return {pass, fmt("mean nMAE average %.2f > ICA %.2f > fine-tuned %.2f; std ICA %.2f -> fine-tuned %.2f",
                    m[kAverage].mean_nmae, m[kIca].mean_nmae, m[kFineTuned].mean_nmae, m[kIca].std_nmae,
                    m[kFineTuned].std_nmae)};
}

Outcome per_day(const CorpusRun& run) {
  int improved = 0;
  for (const DayScore& s : run.eval.per_day) improved += s.nmae[kFineTuned] < s.nmae[kIca];
  const auto n = static_cast<int>(run.eval.per_day.size());
  const double frac = n ? double(improved) / n : 0.0;
  return {frac >= 0.80, fmt("%d of %d days improved (%.1f%%, need 80%%)", improved, n, 100.0 * frac)};
}

Outcome classifier(const CorpusRun& run) {
  int consistent = 0, total = 0;
  for (std::size_t c = 0; c < run.result.customers.size(); ++c) {
    const DailyLoadMatrix& hvac = run.corpus[c].data.hvac;
    for (const DayLabel& l : run.result.customers[c].labels) {
      const double kwh = hvac.samples.col(hvac.index_of(l.date)).sum() / 4.0;
      const DayKind intent = kwh > 0.5 ? DayKind::Hot : kwh == 0.0 ? DayKind::Mild : DayKind::Excluded;
      consistent += l.label == intent;
      ++total;
    }
  }
  const double frac = double(consistent) / total;
  return {frac >= 0.90, fmt("%d of %d days labeled as intended (%.1f%%)", consistent, total, 100.0 * frac)};
}

Outcome metric_identities() {
  const DailyLoadMatrix truth = generate_household(random_household_spec(4),
                                                   generate_temperature(5, WeatherProfile::Hot, 4))
                                    .hvac;
  const bool zero = nmae(truth.samples, truth.samples, 3.0) == 0.0 && nee(truth.samples, truth.samples) == 0.0;
  const Matrix ones = Matrix::Constant(96, 1, 1.0);
  const double example = nmae(ones.array() + 0.01, ones, 4.0);
  const bool exact = std::abs(example - 24.0) <= 1e-12;
  return {zero && exact, fmt("identity %s, 0.01 kW error on a 4 kW rating -> %.12f%%", zero ? "holds" : "fails",
                             example)};
}

// Every regular file under `root`, relative path -> contents.
std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const char* sub : {"corpus", "disaggregate", "evaluate"}) {
    if (!fs::exists(root / sub)) continue;
    for (const auto& e : fs::recursive_directory_iterator(root / sub)) {
      if (e.is_regular_file()) files.emplace_back(fs::relative(e.path(), root).string(), oracle::slurp(e.path()));
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

Outcome end_to_end() {
  const fs::path dir = oracle::scratch_dir("acceptance_e2e");
  const std::string out = (dir / "run").string();
  const std::vector<std::vector<std::string>> steps = {{"synth", "--out", out, "--workers", "1"},
                                                       {"disaggregate", "--out", out, "--workers", "1"},
                                                       {"evaluate", "--out", out, "--workers", "1"}};
  const auto t0 = Clock::now();
  for (const auto& s : steps) {
    const int code = cli::run(s);
    if (code != 0) return {false, s[0] + " exited with " + std::to_string(code)};
  }
  const double secs = seconds_since(t0);
  const auto first = snapshot(dir / "run");
  for (const auto& s : steps) {
    if (cli::run(s) != 0) return {false, "rerun of " + s[0] + " failed"};
  }
  const auto second = snapshot(dir / "run");
  const bool same = first == second && !first.empty();
  fs::remove_all(dir);
  return {secs < 300.0 && same,
          fmt("single worker %.1f s; %zu output files %s on rerun", secs, first.size(),
              same ? "byte-identical" : "differ")};
}

}  // namespace

int main() {
  report(1, "KL closed form vs Monte Carlo", kl_monte_carlo);
  report(2, "ICA recovery", ica_recovery);
  report(3, "whitening", whitening);

  CorpusRun run;
  std::string corpus_error;
  try {
    run = run_corpus();
  } catch (const std::exception& e) {
    corpus_error = e.what();
  }
  auto with_corpus = [&](Outcome (*f)(const CorpusRun&)) {
    return [&, f]() -> Outcome {
      if (!corpus_error.empty()) return {false, "corpus run failed: " + corpus_error};
      return f(run);
    };
  };
  report(4, "constraint satisfaction", with_corpus(constraints));
  report(5, "gradient check", gradient_check);
  report(6, "benchmark ordering", with_corpus(ordering));
  report(7, "per-day improvement", with_corpus(per_day));
  report(8, "classifier accuracy", with_corpus(classifier));
  report(9, "metric identities", metric_identities);
  report(10, "end-to-end runtime and reproducibility", end_to_end);

  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
