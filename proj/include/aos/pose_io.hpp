#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "aos/geometry.hpp"

namespace aos {

class PoseFileError : public std::runtime_error {
 public:
  PoseFileError(const std::string& message, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

struct PoseRecord {
  std::string id;
  std::filesystem::path image;  ///< as written; relative paths are relative to the record file
  PoseParams pose;
};

/// Line written before the records; fixes field order and units.
inline constexpr const char* kPoseFieldsHeader =
    "# fields: id image t_x[m] t_y[m] t_z[m] alpha[deg] beta[deg] gamma[deg]";

/// One record per line, `name=value` fields in header order, angles in degrees.
/// Ids and image paths may not contain whitespace.
void write_pose_records(const std::filesystem::path& path, const std::vector<PoseRecord>& records);

/// Throws PoseFileError on malformed lines or duplicate ids, and when
/// `check_images` is set and a referenced image does not exist.
std::vector<PoseRecord> read_pose_records(const std::filesystem::path& path, bool check_images = true);

/// Image path of a record resolved against the directory of its record file.
std::filesystem::path resolve_image(const std::filesystem::path& record_file, const PoseRecord& record);

}  // namespace aos
