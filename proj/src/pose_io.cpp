#include "aos/pose_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

namespace aos {

namespace {

constexpr const char* kFormatHeader = "# aos pose records v1";
constexpr std::array<const char*, 8> kFields = {"id", "image", "t_x", "t_y", "t_z", "alpha", "beta", "gamma"};

bool has_space(std::string_view s) { return s.find_first_of(" \t\r\n") != std::string_view::npos; }

std::string fmt(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

PoseFileError::PoseFileError(const std::string& message, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

void write_pose_records(const std::filesystem::path& path, const std::vector<PoseRecord>& records) {
  std::set<std::string> ids;
  std::ostringstream out;
  out << kFormatHeader << '\n' << kPoseFieldsHeader << '\n';
  for (const PoseRecord& r : records) {
    const std::string image = r.image.generic_string();
    if (r.id.empty() || has_space(r.id)) throw PoseFileError("invalid pose id '" + r.id + "'");
    if (image.empty() || has_space(image)) throw PoseFileError("invalid image path '" + image + "'");
    if (!ids.insert(r.id).second) throw PoseFileError("duplicate pose id " + r.id);
    const PoseParams& p = r.pose;
    out << "id=" << r.id << " image=" << image << " t_x=" << fmt(p.t_x) << " t_y=" << fmt(p.t_y)
        << " t_z=" << fmt(p.t_z) << " alpha=" << fmt(rad2deg(p.alpha)) << " beta=" << fmt(rad2deg(p.beta))
        << " gamma=" << fmt(rad2deg(p.gamma)) << '\n';
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file << out.str();
  if (!file) throw std::runtime_error("failed writing " + path.string());
}

std::vector<PoseRecord> read_pose_records(const std::filesystem::path& path, bool check_images) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path.string());

  std::vector<PoseRecord> records;
  std::set<std::string> ids;
  bool fields_seen = false;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      if (line.rfind("# fields:", first) == first) {
        if (line.substr(first) != kPoseFieldsHeader) throw PoseFileError("unsupported field header", line_no);
        fields_seen = true;
      }
      continue;
    }
    if (!fields_seen) throw PoseFileError("record before the field header", line_no);

    std::istringstream tokens(line);
    std::array<std::string, kFields.size()> values;
    std::size_t k = 0;
    for (std::string token; tokens >> token; ++k) {
      if (k >= kFields.size()) throw PoseFileError("too many fields", line_no);
      const std::string prefix = std::string(kFields[k]) + "=";
      if (token.rfind(prefix, 0) != 0) throw PoseFileError("expected field " + std::string(kFields[k]), line_no);
      values[k] = token.substr(prefix.size());
      if (values[k].empty()) throw PoseFileError("empty field " + std::string(kFields[k]), line_no);
    }
    if (k != kFields.size()) throw PoseFileError("expected " + std::to_string(kFields.size()) + " fields", line_no);

    PoseRecord r;
    r.id = values[0];
    r.image = values[1];
    std::array<double, 6> v{};
    for (std::size_t j = 0; j < 6; ++j) {
      const std::string& s = values[j + 2];
      const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v[j]);
      if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v[j])) {
        throw PoseFileError("field " + std::string(kFields[j + 2]) + " is not a finite number", line_no);
      }
    }
    r.pose = PoseParams{v[0], v[1], v[2], deg2rad(v[3]), deg2rad(v[4]), deg2rad(v[5])};
    if (!ids.insert(r.id).second) throw PoseFileError("duplicate pose id " + r.id, line_no);
    if (check_images && !std::filesystem::exists(resolve_image(path, r))) {
      throw PoseFileError("image not found: " + resolve_image(path, r).string(), line_no);
    }
    records.push_back(std::move(r));
  }
  if (!fields_seen) throw PoseFileError("missing field header");
  return records;
}

std::filesystem::path resolve_image(const std::filesystem::path& record_file, const PoseRecord& record) {
  if (record.image.is_absolute()) return record.image;
  return record_file.parent_path() / record.image;
}

}  // namespace aos
