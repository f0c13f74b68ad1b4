#include <algorithm>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wlelm/harness.hpp"

namespace wlelm {
namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(const std::string& s, std::size_t line_no) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw InputError("CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& s, std::size_t line_no) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw InputError("CSV line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<ResultRecord> sorted_records(std::vector<ResultRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const ResultRecord& a, const ResultRecord& b) {
    return std::tie(a.sweep_value, a.receiver, a.case_id) < std::tie(b.sweep_value, b.receiver, b.case_id);
  });
  return records;
}

std::string to_csv(std::span<const ResultRecord> records) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : sorted_records({records.begin(), records.end()})) {
    out += r.sweep_variable + ',' + fmt_double(r.sweep_value) + ',' + r.receiver + ',' + r.case_id + ',' +
           fmt_double(r.ber) + ',' + std::to_string(r.bits_total) + ',' + std::to_string(r.bits_error) + ',' +
           std::to_string(r.flops) + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::vector<ResultRecord> parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw InputError("CSV header mismatch");
  std::vector<ResultRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9) throw InputError("CSV line " + std::to_string(line_no) + ": expected 9 fields");
    ResultRecord r;
    r.sweep_variable = f[0];
    r.sweep_value = to_double(f[1], line_no);
    r.receiver = f[2];
    r.case_id = f[3];
    r.ber = to_double(f[4], line_no);
    r.bits_total = to_u64(f[5], line_no);
    r.bits_error = to_u64(f[6], line_no);
    r.flops = to_u64(f[7], line_no);
    r.seed = to_u64(f[8], line_no);
    out.push_back(std::move(r));
  }
  return out;
}

std::string to_json(std::span<const ResultRecord> records) {
  nlohmann::json j;
  j["metadata"] = {{"generated_at", utc_timestamp()}, {"columns", std::string(kCsvHeader)}};
  auto& rows = j["records"] = nlohmann::json::array();
  for (const auto& r : sorted_records({records.begin(), records.end()})) {
    rows.push_back({{"sweep_variable", r.sweep_variable},
                    {"sweep_value", r.sweep_value},
                    {"receiver", r.receiver},
                    {"case", r.case_id},
                    {"ber", r.ber},
                    {"bits_total", r.bits_total},
                    {"bits_error", r.bits_error},
                    {"flops", r.flops},
                    {"seed", r.seed}});
  }
  return j.dump(2) + "\n";
}

std::vector<ResultRecord> parse_json(std::string_view text) {
  std::vector<ResultRecord> out;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& row : j.at("records")) {
      ResultRecord r;
      r.sweep_variable = row.at("sweep_variable").get<std::string>();
      r.sweep_value = row.at("sweep_value").get<double>();
      r.receiver = row.at("receiver").get<std::string>();
      r.case_id = row.at("case").get<std::string>();
      r.ber = row.at("ber").get<double>();
      r.bits_total = row.at("bits_total").get<std::uint64_t>();
      r.bits_error = row.at("bits_error").get<std::uint64_t>();
      r.flops = row.at("flops").get<std::uint64_t>();
      r.seed = row.at("seed").get<std::uint64_t>();
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("results JSON: ") + e.what());
  }
  return out;
}

void export_records(std::span<const ResultRecord> records, ExportFormat format, const std::filesystem::path& path) {
  if (records.empty()) throw InputError("refusing to export an empty record list");
  const std::string text = format == ExportFormat::kCsv ? to_csv(records) : to_json(records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
  out << text;
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace wlelm
