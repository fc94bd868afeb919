#include "saacm/trial.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace saacm {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

class FieldReader {
 public:
  FieldReader(const std::vector<std::string>& fields, std::size_t line_no)
      : fields_(fields), line_no_(line_no) {}

  template <typename T>
  T integer(std::size_t i) const {
    T value{};
    const std::string& s = at(i);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) fail(i);
    return value;
  }

  double real(std::size_t i) const {
    const std::string& s = at(i);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) fail(i);
    return v;
  }

  const std::string& at(std::size_t i) const {
    if (i >= fields_.size())
      throw std::runtime_error("line " + std::to_string(line_no_) + ": missing field " +
                               std::to_string(i));
    return fields_[i];
  }

 private:
  [[noreturn]] void fail(std::size_t i) const {
    throw std::runtime_error("line " + std::to_string(line_no_) + ": malformed field " +
                             std::to_string(i) + " '" + fields_[i] + "'");
  }

  const std::vector<std::string>& fields_;
  std::size_t line_no_;
};

}  // namespace

std::string to_string(Algorithm algo) { return algo == Algorithm::acma ? "acma" : "saacm"; }

Algorithm parse_algorithm(const std::string& text) {
  if (text == "acma") return Algorithm::acma;
  if (text == "saacm") return Algorithm::saacm;
  throw std::invalid_argument("unknown algorithm '" + text + "' (expected acma or saacm)");
}

std::optional<std::uint64_t> TrialRecord::first_hit(double target) const {
  for (const auto& e : events)
    if (e.delta_f <= target) return e.eval_index;
  return std::nullopt;
}

double TrialRecord::best_delta() const {
  return events.empty() ? std::numeric_limits<double>::infinity() : events.back().delta_f;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_header(std::ostream& out) {
  out << "# trial,function_id,instance_id,dim,seed,algo,total_evals,restarts_used,success,mean_n_hat\n"
      << "# event,function_id,instance_id,seed,eval_index,delta_f\n"
      << "# restart,function_id,instance_id,seed,lambda,g_start,first_eval,evals,cycles,mean_n_hat,reason\n";
}

void write_record(std::ostream& out, const TrialRecord& r) {
  out << "trial," << r.function_id << ',' << r.instance_id << ',' << r.dimension << ','
      << r.seed << ',' << to_string(r.algorithm) << ',' << r.total_evals << ','
      << r.restarts_used << ',' << (r.success ? 1 : 0) << ',' << format_double(r.mean_n_hat)
      << '\n';
  for (const auto& e : r.events)
    out << "event," << r.function_id << ',' << r.instance_id << ',' << r.seed << ','
        << e.eval_index << ',' << format_double(e.delta_f) << '\n';
  for (const auto& s : r.restarts)
    out << "restart," << r.function_id << ',' << r.instance_id << ',' << r.seed << ','
        << s.lambda << ',' << s.g_start << ',' << s.first_eval << ',' << s.evals << ','
        << s.cycles << ',' << format_double(s.mean_n_hat) << ',' << s.stop_reason << '\n';
}

std::vector<TrialRecord> read_records(std::istream& in) {
  std::vector<TrialRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_fields(line);
    const FieldReader f(fields, line_no);
    const std::string& kind = f.at(0);

    if (kind == "trial") {
      TrialRecord r;
      r.function_id = f.integer<int>(1);
      r.instance_id = f.integer<int>(2);
      r.dimension = f.integer<std::size_t>(3);
      r.seed = f.integer<std::uint64_t>(4);
      r.algorithm = parse_algorithm(f.at(5));
      r.total_evals = f.integer<std::uint64_t>(6);
      r.restarts_used = f.integer<std::size_t>(7);
      r.success = f.integer<int>(8) != 0;
      r.mean_n_hat = f.real(9);
      records.push_back(std::move(r));
      continue;
    }

    if (records.empty())
      throw std::runtime_error("line " + std::to_string(line_no) + ": '" + kind +
                               "' line before any trial line");
    TrialRecord& r = records.back();
    if (f.integer<int>(1) != r.function_id || f.integer<int>(2) != r.instance_id ||
        f.integer<std::uint64_t>(3) != r.seed)
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": line does not belong to the preceding trial");

    if (kind == "event") {
      r.events.push_back({f.integer<std::uint64_t>(4), f.real(5)});
    } else if (kind == "restart") {
      RestartLogEntry s;
      s.lambda = f.integer<std::size_t>(4);
      s.g_start = f.integer<std::uint64_t>(5);
      s.first_eval = f.integer<std::uint64_t>(6);
      s.evals = f.integer<std::uint64_t>(7);
      s.cycles = f.integer<std::uint64_t>(8);
      s.mean_n_hat = f.real(9);
      s.stop_reason = f.at(10);
      r.restarts.push_back(std::move(s));
    } else {
      throw std::runtime_error("line " + std::to_string(line_no) + ": unknown record kind '" +
                               kind + "'");
    }
  }
  return records;
}

}  // namespace saacm
