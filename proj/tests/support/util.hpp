#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "pickopt/scene.hpp"

namespace testutil {

namespace fs = std::filesystem;

// Unique scratch directory, removed when the fixture goes out of scope.
struct TmpDir {
  fs::path path;
  TmpDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("pickopt_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TmpDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

struct ToolResult {
  int code = -1;
  std::string output;  // stdout + stderr interleaved
};

// Runs the CLI binary through the shell; `env` is prepended verbatim, e.g.
// "PICKOPT_SEED=7".
inline ToolResult run_tool(const std::string& args,
                           const std::string& env = "") {
  std::string cmd = env.empty() ? std::string() : env + " ";
  cmd += std::string(PICKOPT_TOOL_PATH) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  ToolResult r;
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof(buf), pipe)) r.output += buf;
  const int rc = ::pclose(pipe);
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

// Frame with empty segment grid and zero heights over the given bounds.
inline pickopt::SensorFrame blank_frame(const pickopt::Rect& bounds,
                                        double res) {
  pickopt::SensorFrame f;
  f.resolution = res;
  f.heightgrid = pickopt::Grid<double>(bounds, res, 0.0);
  f.segmentgrid =
      pickopt::Grid<int>(bounds, res, pickopt::SensorFrame::kEmpty);
  return f;
}

// Paints an axis-aligned block of cells [ix0, ix1] x [iy0, iy1] at height z.
inline void paint_block(pickopt::SensorFrame& f, int id,
                        pickopt::PackageKind kind, int ix0, int ix1, int iy0,
                        int iy1, double z) {
  for (int iy = iy0; iy <= iy1; ++iy)
    for (int ix = ix0; ix <= ix1; ++ix) {
      f.heightgrid.at(ix, iy) = z;
      f.segmentgrid.at(ix, iy) = id;
    }
  f.kinds[id] = kind;
}

// Single flat box centered in a 1.2 x 1.0 conveyor.
inline pickopt::Scene one_box_scene(double len = 0.3, double wid = 0.2,
                                    double hgt = 0.1, double yaw = 0.0,
                                    pickopt::Vec2 tilt = {0.0, 0.0}) {
  pickopt::Scene s;
  s.conveyor_bounds = {0.0, 0.0, 1.2, 1.0};
  pickopt::PackageSpec p;
  p.id = 0;
  p.kind = pickopt::PackageKind::Box;
  p.center = {0.6, 0.5, hgt * 0.5};
  p.yaw = yaw;
  p.dims = {len, wid, hgt};
  p.top_tilt = tilt;
  s.packages.push_back(p);
  return s;
}

}  // namespace testutil
