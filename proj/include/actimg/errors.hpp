#pragma once

#include <stdexcept>
#include <string>

namespace actimg {

// Base for all recoverable codec errors. Callers that need to skip a view
// or a frame catch the concrete type; everything derives from runtime_error
// so the CLI can report uniformly.
class CodecError : public std::runtime_error {
 public:
  explicit CodecError(const std::string& msg) : std::runtime_error(msg) {}
};

// A 3D point projected at or behind the camera plane. Carries the camera-frame
// depth so the caller can report how far behind the point was.
class BehindCameraError : public CodecError {
 public:
  explicit BehindCameraError(double zc)
      : CodecError("point behind camera, z_c = " + std::to_string(zc)), zc_(zc) {}
  double depth() const { return zc_; }

 private:
  double zc_;
};

// One semantic point could not be rendered into a view.
class EncodeError : public CodecError {
 public:
  EncodeError(const std::string& point, double zc)
      : CodecError("cannot encode point '" + point + "': behind camera, z_c = " +
                   std::to_string(zc)),
        point_(point) {}
  EncodeError(const std::string& point, const std::string& context)
      : CodecError("cannot encode point '" + point + "' " + context), point_(point) {}
  const std::string& point() const { return point_; }

 private:
  std::string point_;
};

class EmptyHeatmapError : public CodecError {
 public:
  explicit EmptyHeatmapError(const std::string& what) : CodecError(what) {}
};

// Every sampled depth candidate scored zero in all side views.
class NoCorrespondenceError : public CodecError {
 public:
  explicit NoCorrespondenceError(const std::string& what) : CodecError(what) {}
};

// No pixel below the gripper threshold: the blue channel is saturated.
class NoBackgroundError : public CodecError {
 public:
  explicit NoBackgroundError(const std::string& what) : CodecError(what) {}
};

class ShapeError : public CodecError {
 public:
  explicit ShapeError(const std::string& what) : CodecError(what) {}
};

// Input file or parameter failed validation; message carries location context.
class ValidationError : public CodecError {
 public:
  explicit ValidationError(const std::string& what) : CodecError(what) {}
};

}  // namespace actimg
