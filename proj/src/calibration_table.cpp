// SPDX-License-Identifier: Apache-2.0
#include "tdgemm/calibration_table.hpp"

#include <algorithm>
#include <cmath>

#include "csv_util.hpp"
#include "tdgemm/error.hpp"

namespace tdgemm {

namespace {

constexpr std::string_view kCalibrationHeader = "precision,mode,W,rmax,mean_err,rmse,trials,seed";
constexpr std::string_view kSpeedupHeader = "precision,mode,W,L,fw_percent,mac_ratio,reps";
constexpr std::string_view kSolutionHeader = "sigma_a,sigma_b,W,rmax,c_a,c_b,snr_db";

void require_fields(const std::vector<std::string_view>& f, std::size_t n, const std::string& row) {
  if (f.size() != n) throw FormatError("expected " + std::to_string(n) + " fields in row '" + row + "'");
}

}  // namespace

void CalibrationTable::insert(const CalibrationKey& key, const CalibrationPoint& point) {
  auto& curve = curves_[key];
  auto it = std::lower_bound(curve.begin(), curve.end(), point.rmax,
                             [](const CalibrationPoint& p, double r) { return p.rmax < r; });
  if (it != curve.end() && it->rmax == point.rmax) {
    *it = point;
  } else {
    curve.insert(it, point);
  }
}

std::vector<CalibrationPoint> CalibrationTable::slice(const CalibrationKey& key) const {
  auto it = curves_.find(key);
  return it == curves_.end() ? std::vector<CalibrationPoint>{} : it->second;
}

bool admissible_point(const CalibrationKey& key, const CalibrationPoint& point) {
  if (!(std::fabs(point.mean_err) < kMaxRelativeBias * point.rmax)) return false;
  if (key.precision == Precision::kDouble && key.w == 4 && point.rmax > kDoubleW4RmaxCap) return false;
  return true;
}

std::vector<CalibrationPoint> CalibrationTable::admitted(const CalibrationKey& key) const {
  std::vector<CalibrationPoint> out;
  for (const auto& p : slice(key))
    if (admissible_point(key, p)) out.push_back(p);
  return out;
}

std::optional<CalibrationPoint> CalibrationTable::find(const CalibrationKey& key, double rmax) const {
  auto it = curves_.find(key);
  if (it == curves_.end()) return std::nullopt;
  for (const auto& p : it->second)
    if (p.rmax == rmax) return p;
  return std::nullopt;
}

std::vector<CalibrationKey> CalibrationTable::keys() const {
  std::vector<CalibrationKey> out;
  for (const auto& [k, v] : curves_) out.push_back(k);
  return out;
}

std::size_t CalibrationTable::size() const {
  std::size_t n = 0;
  for (const auto& [k, v] : curves_) n += v.size();
  return n;
}

void SpeedupProfile::insert(const SpeedupEntry& entry) {
  for (auto& e : entries_) {
    if (e.precision == entry.precision && e.mode == entry.mode && e.w == entry.w) {
      e = entry;
      return;
    }
  }
  entries_.push_back(entry);
}

bool SpeedupProfile::contains(Precision precision, PackingMode mode, int w) const {
  if (w == 1) return true;
  return std::any_of(entries_.begin(), entries_.end(), [&](const SpeedupEntry& e) {
    return e.precision == precision && e.mode == mode && e.w == w;
  });
}

double SpeedupProfile::fw_percent(Precision precision, PackingMode mode, int w) const {
  if (w == 1) return 0.0;
  for (const auto& e : entries_)
    if (e.precision == precision && e.mode == mode && e.w == w) return e.fw_percent;
  throw CalibrationMissingError("no speedup profile for " + std::string(to_string(precision)) + "/" +
                                std::string(to_string(mode)) + "/W=" + std::to_string(w));
}

SpeedupProfile SpeedupProfile::from_mac_model(Precision precision, PackingMode mode, std::size_t tile_side,
                                              int max_w) {
  SpeedupProfile p;
  for (int w = 1; w <= max_w; ++w)
    p.insert({precision, mode, w, tile_side, 100.0 * (w - 1), static_cast<double>(w), 0});
  return p;
}

void save_calibration(const CalibrationTable& table, const std::filesystem::path& path) {
  csv::Document doc;
  doc.meta.emplace_back("tile_side", std::to_string(table.tile_side));
  doc.header = kCalibrationHeader;
  for (const auto& key : table.keys()) {
    for (const auto& p : table.slice(key)) {
      doc.rows.push_back(std::string(to_string(key.precision)) + "," + std::string(to_string(key.mode)) + "," +
                         std::to_string(key.w) + "," + csv::format_double(p.rmax) + "," +
                         csv::format_double(p.mean_err) + "," + csv::format_double(p.rmse) + "," +
                         std::to_string(p.trials) + "," + std::to_string(p.seed));
    }
  }
  csv::write_document(path, doc, kTableFormatVersion);
}

CalibrationTable load_calibration(const std::filesystem::path& path) {
  const csv::Document doc = csv::read_document(path, kCalibrationHeader, kTableFormatVersion);
  CalibrationTable table;
  if (const std::string* l = doc.meta_value("tile_side")) table.tile_side = csv::parse_int<std::size_t>(*l);
  for (const auto& row : doc.rows) {
    const auto f = csv::split(row);
    require_fields(f, 8, row);
    CalibrationKey key{parse_precision(f[0]), parse_mode(f[1]), csv::parse_int<int>(f[2])};
    CalibrationPoint p;
    p.rmax = csv::parse_double(f[3]);
    p.mean_err = csv::parse_double(f[4]);
    p.rmse = csv::parse_double(f[5]);
    p.trials = csv::parse_int<int>(f[6]);
    p.seed = csv::parse_int<std::uint64_t>(f[7]);
    if (p.rmse < 0 || p.trials < 1) throw FormatError("invalid calibration row '" + row + "'");
    auto existing = table.slice(key);
    if (!existing.empty() && existing.back().rmax >= p.rmax)
      throw FormatError("calibration R_max grid is not strictly increasing at '" + row + "'");
    table.insert(key, p);
  }
  return table;
}

void save_speedup(const SpeedupProfile& profile, const std::filesystem::path& path) {
  csv::Document doc;
  doc.header = kSpeedupHeader;
  for (const auto& e : profile.entries()) {
    doc.rows.push_back(std::string(to_string(e.precision)) + "," + std::string(to_string(e.mode)) + "," +
                       std::to_string(e.w) + "," + std::to_string(e.tile_side) + "," +
                       csv::format_double(e.fw_percent) + "," + csv::format_double(e.mac_ratio) + "," +
                       std::to_string(e.reps));
  }
  csv::write_document(path, doc, kTableFormatVersion);
}

SpeedupProfile load_speedup(const std::filesystem::path& path) {
  const csv::Document doc = csv::read_document(path, kSpeedupHeader, kTableFormatVersion);
  SpeedupProfile profile;
  for (const auto& row : doc.rows) {
    const auto f = csv::split(row);
    require_fields(f, 7, row);
    profile.insert({parse_precision(f[0]), parse_mode(f[1]), csv::parse_int<int>(f[2]),
                    csv::parse_int<std::size_t>(f[3]), csv::parse_double(f[4]), csv::parse_double(f[5]),
                    csv::parse_int<int>(f[6])});
  }
  return profile;
}

void save_solutions(const OfflineSolutionTable& table, const std::filesystem::path& path) {
  csv::Document doc;
  doc.meta.emplace_back("precision", std::string(to_string(table.precision)));
  doc.meta.emplace_back("mode", std::string(to_string(table.mode)));
  doc.header = kSolutionHeader;
  for (const auto& e : table.entries()) {
    const auto& s = e.solution;
    doc.rows.push_back(csv::format_double(e.sigma_a) + "," + csv::format_double(e.sigma_b) + "," +
                       std::to_string(s.w) + "," + csv::format_double(s.rmax) + "," + csv::format_double(s.c_a) +
                       "," + csv::format_double(s.c_b) + "," + csv::format_double(s.expected_snr_db));
  }
  csv::write_document(path, doc, kTableFormatVersion);
}

OfflineSolutionTable load_solutions(const std::filesystem::path& path) {
  const csv::Document doc = csv::read_document(path, kSolutionHeader, kTableFormatVersion);
  OfflineSolutionTable table;
  if (const std::string* p = doc.meta_value("precision")) table.precision = parse_precision(*p);
  if (const std::string* m = doc.meta_value("mode")) table.mode = parse_mode(*m);
  for (const auto& row : doc.rows) {
    const auto f = csv::split(row);
    require_fields(f, 7, row);
    OfflineSolution e;
    e.sigma_a = csv::parse_double(f[0]);
    e.sigma_b = csv::parse_double(f[1]);
    e.solution.w = csv::parse_int<int>(f[2]);
    e.solution.rmax = csv::parse_double(f[3]);
    e.solution.c_a = csv::parse_double(f[4]);
    e.solution.c_b = csv::parse_double(f[5]);
    e.solution.expected_snr_db = csv::parse_double(f[6]);
    table.insert(e);
  }
  return table;
}

}  // namespace tdgemm
