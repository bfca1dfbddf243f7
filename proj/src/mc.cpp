#include "bsar/mc.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace bsar {

namespace {

EstimateResult run_estimator(const std::string& name, const BsarDataset& data,
                             const McCellConfig& config, int replication) {
  if (name == "em") return fit_em(data, config.em);
  if (name == "gibbs") {
    Stream rng = replication_stream(config.master_seed, config.cell_id, replication, 1);
    if (config.chain_dump_prefix.empty()) return fit_gibbs(data, config.gibbs, rng);
    std::vector<GibbsChainRow> chain;
    EstimateResult res = fit_gibbs(data, config.gibbs, rng, &chain);
    char name_buf[64];
    std::snprintf(name_buf, sizeof(name_buf), ".cell%u.rep%d.gibbs.csv", config.cell_id,
                  replication);
    std::ofstream out(config.chain_dump_prefix + name_buf);
    out << "sweep,beta0,beta1,rho,sigma2,accepted\n";
    for (const auto& row : chain) {
      char buf[200];
      std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%d\n", row.sweep,
                    row.beta0, row.beta1, row.rho, row.sigma2, int(row.accepted));
      out << buf;
    }
    return res;
  }
  if (name == "ris")
    return fit_ris(data, config.ris,
                   replication_stream(config.master_seed, config.cell_id, replication, 2));
  if (name == "gmm") return fit_gmm_ps(data, config.gmm);
  if (name == "gmmlin") return fit_gmm_linearized(data, config.gmm);
  throw Error("unknown estimator: " + name);
}

}  // namespace

std::vector<ReplicationRecord> run_cell(const McCellConfig& config) {
  if (config.replications < 1) throw Error("replications must be >= 1");
  const int n_threads = config.threads > 0
                            ? config.threads
                            : std::max(1u, std::thread::hardware_concurrency());

  std::vector<ReplicationRecord> records;
  std::mutex records_mutex;
  std::atomic<int> next{0};

  auto worker = [&] {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= config.replications) return;

      Stream dgp = replication_stream(config.master_seed, config.cell_id, rep, 0);
      const std::uint64_t seed_used = dgp.key();
      std::vector<ReplicationRecord> local;
      try {
        auto W = draw_weights(config.n, config.d, dgp);
        const BsarDataset data = generate_bsar(W, config.beta_true, config.rho_true, dgp);
        for (const auto& name : config.estimators) {
          ReplicationRecord rec;
          rec.cell_id = config.cell_id;
          rec.replication = rep;
          rec.estimator = name;
          rec.seed = seed_used;
          const auto t0 = std::chrono::steady_clock::now();
          try {
            const EstimateResult est = run_estimator(name, data, config, rep);
            rec.rho_hat = est.rho;
            rec.beta0_hat = est.beta0();
            rec.beta1_hat = est.beta1();
            rec.converged = est.converged;
          } catch (const std::exception&) {
            // failure recorded as non-finite estimates
          }
          rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
          local.push_back(std::move(rec));
        }
      } catch (const std::exception&) {
        // data generation failed: one failed record per estimator
        for (const auto& name : config.estimators) {
          ReplicationRecord rec;
          rec.cell_id = config.cell_id;
          rec.replication = rep;
          rec.estimator = name;
          rec.seed = seed_used;
          local.push_back(std::move(rec));
        }
      }
      std::lock_guard<std::mutex> lock(records_mutex);
      for (auto& r : local) records.push_back(std::move(r));
    }
  };

  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // deterministic output order regardless of scheduling
  std::map<std::string, int> est_order;
  for (int i = 0; i < int(config.estimators.size()); ++i)
    est_order[config.estimators[i]] = i;
  std::sort(records.begin(), records.end(),
            [&](const ReplicationRecord& a, const ReplicationRecord& b) {
              if (a.replication != b.replication) return a.replication < b.replication;
              return est_order[a.estimator] < est_order[b.estimator];
            });
  return records;
}

namespace {

ParamSummary summarize_param(const std::vector<double>& biases, int total) {
  ParamSummary s;
  s.n_effective = int(biases.size());
  s.n_failed = total - s.n_effective;
  if (biases.empty()) return s;
  double sum = 0.0;
  for (double b : biases) sum += b;
  s.mean_bias = sum / biases.size();
  if (biases.size() == 1) {
    s.sd_bias = 0.0;
    return s;
  }
  double ss = 0.0;
  for (double b : biases) ss += (b - s.mean_bias) * (b - s.mean_bias);
  s.sd_bias = std::sqrt(ss / (biases.size() - 1));
  return s;
}

}  // namespace

std::vector<BiasSummary> summarize(const std::vector<ReplicationRecord>& records,
                                   const Eigen::Vector2d& beta_true, double rho_true) {
  if (records.empty()) throw EmptyCell("no records to summarize");
  std::vector<std::string> order;
  std::map<std::string, std::array<std::vector<double>, 3>> biases;
  std::map<std::string, int> totals;
  for (const auto& r : records) {
    if (!biases.count(r.estimator)) order.push_back(r.estimator);
    auto& b = biases[r.estimator];
    ++totals[r.estimator];
    if (std::isfinite(r.rho_hat)) b[0].push_back(r.rho_hat - rho_true);
    if (std::isfinite(r.beta0_hat)) b[1].push_back(r.beta0_hat - beta_true(0));
    if (std::isfinite(r.beta1_hat)) b[2].push_back(r.beta1_hat - beta_true(1));
  }
  std::vector<BiasSummary> out;
  for (const auto& name : order) {
    BiasSummary s;
    s.estimator = name;
    s.rho = summarize_param(biases[name][0], totals[name]);
    s.beta0 = summarize_param(biases[name][1], totals[name]);
    s.beta1 = summarize_param(biases[name][2], totals[name]);
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_table(const std::vector<BiasSummary>& summaries,
                         const std::string& parameter, bool csv) {
  std::ostringstream os;
  const char* sep = csv ? "," : "  ";
  os << "estimator" << sep << parameter << "_bias" << sep << "n_effective" << sep
     << "n_failed\n";
  for (const auto& s : summaries) {
    const ParamSummary& p = parameter == "rho" ? s.rho
                            : parameter == "beta0" ? s.beta0
                                                   : s.beta1;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.3f (%.3f)", p.mean_bias, p.sd_bias);
    if (csv)
      os << s.estimator << ',' << buf << ',' << p.n_effective << ',' << p.n_failed << '\n';
    else {
      char line[200];
      std::snprintf(line, sizeof(line), "%-8s  %-18s  %6d  %6d\n", s.estimator.c_str(), buf,
                    p.n_effective, p.n_failed);
      os << line;
    }
  }
  return os.str();
}

std::string records_to_csv(const std::vector<ReplicationRecord>& records) {
  std::ostringstream os;
  os << "cell_id,replication,estimator,rho_hat,beta0_hat,beta1_hat,converged,seconds,seed\n";
  char buf[320];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%u,%d,%s,%.17g,%.17g,%.17g,%d,%.6f,%llu\n", r.cell_id,
                  r.replication, r.estimator.c_str(), r.rho_hat, r.beta0_hat, r.beta1_hat,
                  int(r.converged), r.seconds, static_cast<unsigned long long>(r.seed));
    os << buf;
  }
  return os.str();
}

std::vector<ReplicationRecord> records_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw Error("empty csv");
  if (line != "cell_id,replication,estimator,rho_hat,beta0_hat,beta1_hat,converged,seconds,seed")
    throw Error("unexpected csv header: " + line);
  std::vector<ReplicationRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ReplicationRecord r;
    char est[64];
    unsigned long long seed = 0;
    int conv = 0;
    if (std::sscanf(line.c_str(), "%u,%d,%63[^,],%lg,%lg,%lg,%d,%lg,%llu", &r.cell_id,
                    &r.replication, est, &r.rho_hat, &r.beta0_hat, &r.beta1_hat, &conv,
                    &r.seconds, &seed) != 9)
      throw Error("bad csv row: " + line);
    r.estimator = est;
    r.converged = conv != 0;
    r.seed = seed;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace bsar
