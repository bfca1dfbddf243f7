#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bsar/em.hpp"
#include "bsar/gibbs.hpp"
#include "bsar/gmm.hpp"
#include "bsar/ris.hpp"

namespace bsar {

// One simulation cell of the estimator-bias experiment.
struct McCellConfig {
  int n = 50;
  double rho_true = 0.0;
  double d = 0.21;
  int replications = 1000;
  std::uint64_t master_seed = 1;
  std::uint32_t cell_id = 0;
  Eigen::Vector2d beta_true{4.0, -2.0};
  std::vector<std::string> estimators{"em", "gibbs", "ris", "gmm", "gmmlin"};

  EmConfig em;
  GibbsConfig gibbs;
  RisConfig ris;
  GmmConfig gmm;

  int threads = 0;                 // 0 = hardware concurrency
  std::string chain_dump_prefix;   // empty = no Gibbs chain dumps
};

struct ReplicationRecord {
  std::uint32_t cell_id = 0;
  int replication = 0;
  std::string estimator;
  double rho_hat = kNaN;
  double beta0_hat = kNaN;
  double beta1_hat = kNaN;
  bool converged = false;
  double seconds = 0.0;
  std::uint64_t seed = 0;
};

// Runs every replication of the cell (parallel over replications) and never
// aborts on a per-replication estimator failure.
std::vector<ReplicationRecord> run_cell(const McCellConfig& config);

struct ParamSummary {
  double mean_bias = kNaN;
  double sd_bias = kNaN;
  int n_effective = 0;
  int n_failed = 0;
};

struct BiasSummary {
  std::string estimator;
  ParamSummary rho, beta0, beta1;
};

// Mean and sample sd of (estimate - truth) per estimator and parameter,
// non-finite estimates excluded and counted.
std::vector<BiasSummary> summarize(const std::vector<ReplicationRecord>& records,
                                   const Eigen::Vector2d& beta_true, double rho_true);

// One row per estimator, "mean (sd)" with three decimals; `csv` switches the
// cell separator. Empty input renders the header only.
std::string render_table(const std::vector<BiasSummary>& summaries,
                         const std::string& parameter, bool csv);

std::string records_to_csv(const std::vector<ReplicationRecord>& records);
std::vector<ReplicationRecord> records_from_csv(const std::string& text);

}  // namespace bsar
