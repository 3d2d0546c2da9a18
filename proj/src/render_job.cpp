#include "mirroreyes/render_job.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mirroreyes {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

RenderJob render_job_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw std::invalid_argument("render job must be a JSON object");
  RenderJob job;
  job.config = j.get<SessionConfig>();
  job.config.validate();
  const int w = static_cast<int>(job.config.camera.width_px);
  const int h = static_cast<int>(job.config.camera.height_px);

  const Json image = j.value("camera_image", Json::object());
  if (image.contains("png")) {
    std::filesystem::path p = image.at("png").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    job.camera_image = read_png(p);
    if (job.camera_image.width() != w || job.camera_image.height() != h) {
      throw std::invalid_argument("camera image size differs from camera intrinsics");
    }
  } else {
    std::vector<Vec2> faces;
    if (image.contains("faces")) {
      faces = image.at("faces").get<std::vector<Vec2>>();
    } else {
      for (const auto& f : default_scene(job.config).faces) faces.push_back(f.center);
    }
    job.camera_image = make_test_camera_image(w, h, faces, image.value("face_size_px", 48));
  }

  if (const auto it = j.find("frames"); it != j.end()) {
    int index = 0;
    for (const auto& f : *it) {
      RenderFrame frame;
      frame.name = f.value("name", "frame" + std::to_string(index));
      if (f.contains("render_spec")) {
        frame.spec = f.at("render_spec").get<RenderSpec>();
      } else {
        frame.condition = parse_condition(f.value("condition", std::string("mirror_eye")));
        frame.target = f.contains("target")
                           ? f.at("target").get<Vec2>()
                           : Vec2{job.config.camera.width_px / 2, job.config.camera.height_px / 2};
        if (f.contains("distance_m")) frame.distance_m = f.at("distance_m").get<double>();
      }
      job.frames.push_back(std::move(frame));
      ++index;
    }
  } else {
    for (auto c : kAllConditions) {
      RenderFrame frame;
      frame.name = std::string(to_string(c));
      frame.condition = c;
      frame.target = {job.config.camera.width_px / 2, job.config.camera.height_px / 2};
      job.frames.push_back(frame);
    }
  }
  return job;
}

RenderJob load_render_job(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open render spec " + path.string());
  try {
    return render_job_from_json(Json::parse(in, nullptr, true, true), path.parent_path());
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

RenderSpec frame_spec(const RenderJob& job, const RenderFrame& frame) {
  if (frame.spec) return *frame.spec;
  const auto& c = job.config;
  const auto target = TargetPoint::clamped(frame.target, c.camera);
  DepthEstimate depth;
  if (frame.distance_m && *frame.distance_m > 0.0) depth = {*frame.distance_m, true};
  const auto placed = place_eyes(target, c.camera, c.left_eye, c.right_eye, depth,
                                 c.vergence_gain_m);
  return build_render_spec(frame.condition, {c.left_eye, placed.left},
                           {c.right_eye, placed.right}, "camera", c.style);
}

std::vector<RenderedFile> run_render_job(const RenderJob& job,
                                         const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<RenderedFile> files;
  Json manifest = Json::array();
  for (const auto& frame : job.frames) {
    const RenderSpec spec = frame_spec(job, frame);
    for (std::size_t e = 0; e < 2; ++e) {
      const char* eye = e == 0 ? "left" : "right";
      const RasterImage raster = composite_eye(spec.eyes[e], job.camera_image);
      RenderedFile f{frame.name, eye, out_dir / (frame.name + "_" + eye + ".png"),
                     raster_digest(raster)};
      write_png(raster, f.path);
      manifest.push_back(Json{{"frame", f.frame},
                              {"eye", f.eye},
                              {"file", f.path.filename().string()},
                              {"digest", hex64(f.digest)},
                              {"spec", spec.eyes[e]}});
      files.push_back(std::move(f));
    }
  }
  std::ofstream out(out_dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  return files;
}

}  // namespace mirroreyes
