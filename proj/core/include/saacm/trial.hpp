#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace saacm {

enum class Algorithm { acma, saacm };

std::string to_string(Algorithm algo);
/// Accepts "acma" or "saacm"; throws std::invalid_argument otherwise.
Algorithm parse_algorithm(const std::string& text);

/// A new best noise-free distance to the optimum, observed at the
/// `eval_index`-th true evaluation (1-based).
struct ImprovementEvent {
  std::uint64_t eval_index = 0;
  double delta_f = 0.0;

  bool operator==(const ImprovementEvent&) const = default;
};

struct RestartLogEntry {
  std::size_t lambda = 0;
  std::uint64_t g_start = 0;
  std::uint64_t first_eval = 0;  // evaluations consumed before this run started
  std::uint64_t evals = 0;       // evaluations consumed by this run
  std::uint64_t cycles = 0;
  double mean_n_hat = 0.0;
  std::string stop_reason;

  bool operator==(const RestartLogEntry&) const = default;
};

struct TrialRecord {
  int function_id = 0;
  int instance_id = 0;
  std::size_t dimension = 0;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::saacm;
  std::vector<ImprovementEvent> events;
  std::uint64_t total_evals = 0;
  std::size_t restarts_used = 0;
  bool success = false;
  /// Surrogate generations per eligible cycle, averaged over the whole trial.
  double mean_n_hat = 0.0;
  std::vector<RestartLogEntry> restarts;

  bool operator==(const TrialRecord&) const = default;

  /// Evaluations spent until delta_f <= target first held, if ever.
  std::optional<std::uint64_t> first_hit(double target) const;
  double best_delta() const;
};

/// Line-oriented text format, one record kind per line:
///   trial,<fid>,<iid>,<dim>,<seed>,<algo>,<total_evals>,<restarts_used>,<success>,<mean_n_hat>
///   event,<fid>,<iid>,<seed>,<eval_index>,<delta_f>
///   restart,<fid>,<iid>,<seed>,<lambda>,<g_start>,<first_eval>,<evals>,<cycles>,<mean_n_hat>,<reason>
/// preceded by '#' header lines naming the columns. Floats use 17 significant
/// digits, so parse(emit(r)) == r.
void write_header(std::ostream& out);
void write_record(std::ostream& out, const TrialRecord& record);
std::vector<TrialRecord> read_records(std::istream& in);

std::string format_double(double value);

}  // namespace saacm
