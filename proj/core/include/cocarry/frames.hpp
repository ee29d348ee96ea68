#pragma once

#include <string>
#include <vector>

#include "cocarry/ik.hpp"

namespace cocarry {

/// Loads skeleton frames from CSV with header
///   t,l_sx,l_sy,l_sz,l_ex,l_ey,l_ez,l_wx,l_wy,l_wz,
///     r_sx,r_sy,r_sz,r_ex,r_ey,r_ez,r_wx,r_wy,r_wz
/// (SI units, torso frame). Frames are returned sorted by time. Throws
/// ParseError on malformed rows and UnitSanityError when any observed
/// segment length falls outside the 0.1-0.6 m band.
std::vector<SkeletonFrame> ingest_frames(const std::string& path);

void write_frames_csv(const std::string& path, const std::vector<SkeletonFrame>& frames);

}  // namespace cocarry
