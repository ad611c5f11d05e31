#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cmtext/errors.hpp"
#include "cmtext/geometry.hpp"
#include "cmtext/raster.hpp"

namespace cmtext {

struct AnnotationInstance {
  std::vector<Point> points;
  bool ignore = false;
  std::optional<std::string> text;
};

struct AnnotationRecord {
  std::string image;
  int width = 0;
  int height = 0;
  std::vector<AnnotationInstance> instances;
};

struct DetectionInstance {
  std::vector<Point> points;
  double score = 0.0;
};

struct DetectionRecord {
  std::string image;
  std::vector<DetectionInstance> detections;
};

struct CenterRecord {
  double x = 0.0, y = 0.0, pmd = 0.0;
  std::array<double, 8> rd{};
};

struct LabelInstanceRecord {
  double pmd = 0.0;
  std::vector<CenterRecord> centers;
  bool ignore = false;
};

struct LabelRecord {
  std::string image;
  double mu = 0.5;
  int scale = 1;
  std::vector<LabelInstanceRecord> instances;
};

struct ParseIssue {
  int line = 0;
  std::string message;
};

/// One detection line per record: `x1,y1,...,x4,y4,transcription`.
/// Transcription "###" marks a don't-care instance. Malformed lines go
/// to `issues`; the call only throws when the payload is nonempty and
/// no line parsed.
AnnotationRecord parse_icdar_quads(const std::string& payload, int width, int height,
                                   std::vector<ParseIssue>* issues = nullptr);

// NDJSON: one JSON object per line. Coordinates, distances and scores
// are quantized to 4 decimals on write; writing then reading is exact
// on the quantized values.
std::vector<AnnotationRecord> read_ndjson_annotations(std::istream& in);
void write_ndjson_annotations(std::ostream& out, const std::vector<AnnotationRecord>& records);
std::vector<DetectionRecord> read_ndjson_detections(std::istream& in);
void write_ndjson_detections(std::ostream& out, const std::vector<DetectionRecord>& records);
std::vector<LabelRecord> read_ndjson_labels(std::istream& in);
void write_ndjson_labels(std::ostream& out, const std::vector<LabelRecord>& records);

/// Binary masks as PGM P5, maxval 255, 0 = background, 255 =
/// foreground; any other value is rejected on read.
BinaryGrid read_pgm(std::istream& in);
void write_pgm(std::ostream& out, const BinaryGrid& grid);

/// Soft masks: "SOFTMASK v1\n", "W H\n", then W*H little-endian 32-bit
/// floats row-major. Bit-exact on float32 payloads.
SoftGrid read_softmask(std::istream& in);
void write_softmask(std::ostream& out, const SoftGrid& grid);

/// Round to 4 fractional digits (the serialization precision).
double quantize4(double v);

}  // namespace cmtext
