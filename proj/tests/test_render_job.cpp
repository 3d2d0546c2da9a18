#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mirroreyes/render_job.hpp"

using namespace mirroreyes;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("render job writes every eye and a manifest that matches the rasters") {
  const auto job = load_render_job(MIRROREYES_FIXTURE_DIR "/render_job.json");
  REQUIRE(job.frames.size() == 4);
  CHECK(job.camera_image ==
        make_test_camera_image(1280, 720, {{320, 360}, {640, 360}, {960, 360}}, 48));

  const auto dir = scratch("mirroreyes_render_job");
  const auto files = run_render_job(job, dir);
  REQUIRE(files.size() == 8);
  for (const auto& f : files) {
    const auto frame = std::find_if(job.frames.begin(), job.frames.end(),
                                    [&](const auto& x) { return x.name == f.frame; });
    REQUIRE(frame != job.frames.end());
    const auto spec = frame_spec(job, *frame);
    const auto& eye = spec.eyes[f.eye == "left" ? 0 : 1];
    const auto img = read_png(f.path);
    CHECK(img == composite_eye(eye, job.camera_image));
    CHECK(raster_digest(img) == f.digest);
  }

  std::ifstream in(dir / "manifest.json");
  const Json manifest = Json::parse(in);
  REQUIRE(manifest.size() == 8);
  CHECK(manifest[0].at("frame") == "eye_only");
  CHECK(manifest[0].at("eye") == "left");
  CHECK(manifest[0].at("file") == "eye_only_left.png");
  CHECK(manifest[0].at("digest").get<std::string>().size() == 16);
  std::filesystem::remove_all(dir);
}

TEST_CASE("a job without frames renders each condition at the center") {
  const auto job = render_job_from_json(Json::object());
  REQUIRE(job.frames.size() == 3);
  for (const auto& f : job.frames) {
    CHECK(f.target.x == 640.0);
    CHECK(f.target.y == 360.0);
  }
}

TEST_CASE("an explicit render spec is used as given") {
  const auto base = render_job_from_json(Json::object());
  RenderSpec spec = frame_spec(base, base.frames[0]);
  spec.eyes[0].alpha = 0.25;
  const auto job = render_job_from_json(Json{{"frames", Json::array({Json{{"name", "raw"}, {"render_spec", spec}}})}});
  CHECK(frame_spec(job, job.frames[0]) == spec);
}

TEST_CASE("camera PNGs must match the configured size") {
  const auto dir = scratch("mirroreyes_render_png");
  std::filesystem::create_directories(dir);
  write_png(RasterImage(64, 48), dir / "small.png");
  CHECK_THROWS_AS(render_job_from_json(Json{{"camera_image", {{"png", "small.png"}}}}, dir),
                  std::invalid_argument);
  write_png(make_test_camera_image(1280, 720, {{100, 100}}), dir / "cam.png");
  const auto job = render_job_from_json(Json{{"camera_image", {{"png", "cam.png"}}}}, dir);
  CHECK(job.camera_image == make_test_camera_image(1280, 720, {{100, 100}}));
  std::filesystem::remove_all(dir);
}
