#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "aos/pose_io.hpp"

using namespace aos;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "aos_test_pose_io";
  fs::create_directories(dir / "views");
  for (const char* name : {"a.pfm", "b.pfm"}) std::ofstream(dir / "views" / name) << "x";
  return dir;
}

std::vector<PoseRecord> sample_records() {
  PoseRecord a{"view_a", "views/a.pfm", {}};
  a.pose = {1.25, -3.5, 30.0, 0.001, -0.02, 0.1};
  PoseRecord b{"view_b", "views/b.pfm", {}};
  b.pose = {0.1, 0.2, 29.7, deg2rad(1.0), deg2rad(-0.3), deg2rad(179.9)};
  return {a, b};
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int error_line(const fs::path& p) {
  try {
    read_pose_records(p);
  } catch (const PoseFileError& e) {
    return e.line();
  }
  FAIL("expected PoseFileError");
  return -1;
}

}  // namespace

TEST_CASE("round trip is exact") {
  const fs::path dir = scratch_dir();
  const fs::path file = dir / "poses.txt";
  const std::vector<PoseRecord> records = sample_records();
  write_pose_records(file, records);
  const std::vector<PoseRecord> back = read_pose_records(file);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].id == records[i].id);
    CHECK(back[i].image == records[i].image);
    // Angles go through degrees; the round trip may move the last bit.
    CHECK(back[i].pose.t_x == records[i].pose.t_x);
    CHECK(back[i].pose.t_z == records[i].pose.t_z);
    CHECK(back[i].pose.gamma == doctest::Approx(records[i].pose.gamma).epsilon(1e-15));
  }
  // Writing what was read reproduces the file.
  const fs::path again = dir / "poses_again.txt";
  write_pose_records(again, back);
  std::ifstream f1(file), f2(again);
  const std::string t1((std::istreambuf_iterator<char>(f1)), {});
  const std::string t2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(t1 == t2);
  CHECK(t1.find(kPoseFieldsHeader) != std::string::npos);
  CHECK(resolve_image(file, back[0]) == dir / "views/a.pfm");
}

TEST_CASE("angles are written in degrees") {
  const fs::path dir = scratch_dir();
  const fs::path file = dir / "deg.txt";
  PoseRecord r{"v", "views/a.pfm", {}};
  r.pose.beta = deg2rad(2.0);
  write_pose_records(file, {r});
  std::ifstream in(file);
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.find("beta=2 ") != std::string::npos);
}

TEST_CASE("malformed files") {
  const fs::path dir = scratch_dir();
  const fs::path file = dir / "bad.txt";
  const std::string header = std::string("# aos pose records v1\n") + kPoseFieldsHeader + "\n";
  const std::string good_a = "id=a image=views/a.pfm t_x=0 t_y=0 t_z=30 alpha=0 beta=0 gamma=0\n";

  SUBCASE("duplicate ids") {
    write_text(file, header + good_a + good_a);
    CHECK(error_line(file) == 4);
  }
  SUBCASE("missing image") {
    write_text(file, header + "id=c image=views/c.pfm t_x=0 t_y=0 t_z=30 alpha=0 beta=0 gamma=0\n");
    CHECK(error_line(file) == 3);
    CHECK(read_pose_records(file, false).size() == 1);
  }
  SUBCASE("fields out of order") {
    write_text(file, header + "id=a image=views/a.pfm t_y=0 t_x=0 t_z=30 alpha=0 beta=0 gamma=0\n");
    CHECK(error_line(file) == 3);
  }
  SUBCASE("bad number") {
    write_text(file, header + "id=a image=views/a.pfm t_x=abc t_y=0 t_z=30 alpha=0 beta=0 gamma=0\n");
    CHECK(error_line(file) == 3);
  }
  SUBCASE("missing field header") {
    write_text(file, "# aos pose records v1\n" + good_a);
    CHECK_THROWS_AS(read_pose_records(file), PoseFileError);
  }
  SUBCASE("missing file is an I/O error") { CHECK_THROWS_AS(read_pose_records(dir / "nope.txt"), std::runtime_error); }
  SUBCASE("writer rejects duplicates and whitespace") {
    std::vector<PoseRecord> r = sample_records();
    r[1].id = r[0].id;
    CHECK_THROWS_AS(write_pose_records(file, r), PoseFileError);
    r = sample_records();
    r[0].image = "my views/a.pfm";
    CHECK_THROWS_AS(write_pose_records(file, r), PoseFileError);
  }
}
