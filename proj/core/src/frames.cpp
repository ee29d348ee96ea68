#include "cocarry/frames.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cocarry/errors.hpp"

namespace cocarry {

namespace {

void check_band(const ArmObservation& obs, double t, const char* side) {
  const double ua = (obs.elbow - obs.shoulder).norm();
  const double fa = (obs.wrist - obs.elbow).norm();
  for (double len : {ua, fa}) {
    if (len < 0.1 || len > 0.6) {
      std::ostringstream os;
      os << side << " arm segment length " << len << " m at t=" << t
         << " is outside the plausible 0.1-0.6 m band";
      throw UnitSanityError(os.str());
    }
  }
}

}  // namespace

std::vector<SkeletonFrame> ingest_frames(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open frames file " + path);

  std::vector<SkeletonFrame> frames;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (lineno == 1 || (frames.empty() && line.find("t,") == first)) {
      if (!std::isdigit(static_cast<unsigned char>(line[first])) &&
          line[first] != '-' && line[first] != '+')
        continue;  // header row
    }
    std::istringstream ss(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(tok, &used));
      } catch (const std::exception&) {
        throw ParseError("malformed number '" + tok + "'", lineno);
      }
    }
    if (vals.size() != 19)
      throw ParseError("expected 19 columns, got " + std::to_string(vals.size()),
                       lineno);
    SkeletonFrame f;
    f.timestamp = vals[0];
    f.left.shoulder = Vec3(vals[1], vals[2], vals[3]);
    f.left.elbow = Vec3(vals[4], vals[5], vals[6]);
    f.left.wrist = Vec3(vals[7], vals[8], vals[9]);
    f.right.shoulder = Vec3(vals[10], vals[11], vals[12]);
    f.right.elbow = Vec3(vals[13], vals[14], vals[15]);
    f.right.wrist = Vec3(vals[16], vals[17], vals[18]);
    check_band(f.left, f.timestamp, "left");
    check_band(f.right, f.timestamp, "right");
    frames.push_back(f);
  }
  std::stable_sort(frames.begin(), frames.end(),
                   [](const SkeletonFrame& a, const SkeletonFrame& b) {
                     return a.timestamp < b.timestamp;
                   });
  return frames;
}

void write_frames_csv(const std::string& path, const std::vector<SkeletonFrame>& frames) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error("cannot open " + path + " for writing");
  std::fprintf(f,
               "t,l_sx,l_sy,l_sz,l_ex,l_ey,l_ez,l_wx,l_wy,l_wz,"
               "r_sx,r_sy,r_sz,r_ex,r_ey,r_ez,r_wx,r_wy,r_wz\n");
  for (const auto& fr : frames) {
    std::fprintf(f, "%.12g", fr.timestamp);
    for (const ArmObservation* o : {&fr.left, &fr.right})
      for (const Vec3* p : {&o->shoulder, &o->elbow, &o->wrist})
        std::fprintf(f, ",%.12g,%.12g,%.12g", p->x(), p->y(), p->z());
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

}  // namespace cocarry
