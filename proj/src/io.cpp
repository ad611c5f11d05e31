#include "cmtext/io.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace cmtext {

using nlohmann::json;

double quantize4(double v) { return std::round(v * 1e4) / 1e4; }

namespace {

json points_to_json(const std::vector<Point>& pts) {
  json arr = json::array();
  for (const Point& p : pts) arr.push_back({quantize4(p.x), quantize4(p.y)});
  return arr;
}

std::vector<Point> points_from_json(const json& arr) {
  std::vector<Point> pts;
  for (const auto& pair : arr) {
    if (!pair.is_array() || pair.size() != 2) {
      throw json::type_error::create(302, "point must be a [x, y] pair", nullptr);
    }
    pts.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  return pts;
}

// Shared NDJSON reading loop: parse each nonempty line, surface schema
// problems with their line number.
template <typename Record, typename FromJson>
std::vector<Record> read_ndjson(std::istream& in, FromJson from_json) {
  std::vector<Record> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

template <typename T>
T require(const json& j, const char* field) {
  if (!j.contains(field)) {
    throw json::other_error::create(501, std::string("missing field ") + field, nullptr);
  }
  return j.at(field).get<T>();
}

}  // namespace

AnnotationRecord parse_icdar_quads(const std::string& payload, int width, int height,
                                   std::vector<ParseIssue>* issues) {
  AnnotationRecord record;
  record.width = width;
  record.height = height;

  std::istringstream in(payload);
  std::string line;
  int line_no = 0;
  int seen_content = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    ++seen_content;

    std::array<double, 8> coords{};
    std::size_t pos = 0;
    bool ok = true;
    for (int i = 0; i < 8 && ok; ++i) {
      const std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) {
        ok = false;
        break;
      }
      try {
        std::size_t used = 0;
        coords[static_cast<std::size_t>(i)] = std::stod(line.substr(pos, comma - pos), &used);
        if (used != comma - pos) ok = false;
      } catch (const std::exception&) {
        ok = false;
      }
      pos = comma + 1;
    }
    if (!ok) {
      if (issues) issues->push_back({line_no, "expected 8 comma-separated coordinates"});
      continue;
    }
    const std::string transcription = line.substr(pos);
    AnnotationInstance inst;
    for (int i = 0; i < 4; ++i) {
      inst.points.push_back({coords[static_cast<std::size_t>(2 * i)],
                             coords[static_cast<std::size_t>(2 * i + 1)]});
    }
    inst.ignore = transcription == "###";
    inst.text = transcription;
    record.instances.push_back(std::move(inst));
  }

  if (seen_content > 0 && record.instances.empty()) {
    throw ParseError("no valid annotation lines");
  }
  return record;
}

std::vector<AnnotationRecord> read_ndjson_annotations(std::istream& in) {
  return read_ndjson<AnnotationRecord>(in, [](const json& j) {
    AnnotationRecord r;
    r.image = require<std::string>(j, "image");
    r.width = require<int>(j, "width");
    r.height = require<int>(j, "height");
    for (const auto& ji : j.value("instances", json::array())) {
      AnnotationInstance inst;
      if (!ji.contains("points")) {
        throw json::other_error::create(501, "missing field points", nullptr);
      }
      inst.points = points_from_json(ji.at("points"));
      inst.ignore = ji.value("ignore", false);
      if (ji.contains("text") && !ji.at("text").is_null()) {
        inst.text = ji.at("text").get<std::string>();
      }
      r.instances.push_back(std::move(inst));
    }
    return r;
  });
}

void write_ndjson_annotations(std::ostream& out, const std::vector<AnnotationRecord>& records) {
  for (const auto& r : records) {
    json j;
    j["image"] = r.image;
    j["width"] = r.width;
    j["height"] = r.height;
    j["instances"] = json::array();
    for (const auto& inst : r.instances) {
      json ji;
      ji["points"] = points_to_json(inst.points);
      ji["ignore"] = inst.ignore;
      ji["text"] = inst.text ? json(*inst.text) : json(nullptr);
      j["instances"].push_back(std::move(ji));
    }
    out << j.dump() << '\n';
  }
}

std::vector<DetectionRecord> read_ndjson_detections(std::istream& in) {
  return read_ndjson<DetectionRecord>(in, [](const json& j) {
    DetectionRecord r;
    r.image = require<std::string>(j, "image");
    for (const auto& jd : j.value("detections", json::array())) {
      DetectionInstance det;
      if (!jd.contains("points")) {
        throw json::other_error::create(501, "missing field points", nullptr);
      }
      det.points = points_from_json(jd.at("points"));
      det.score = require<double>(jd, "score");
      r.detections.push_back(std::move(det));
    }
    return r;
  });
}

void write_ndjson_detections(std::ostream& out, const std::vector<DetectionRecord>& records) {
  for (const auto& r : records) {
    json j;
    j["image"] = r.image;
    j["detections"] = json::array();
    for (const auto& det : r.detections) {
      json jd;
      jd["points"] = points_to_json(det.points);
      jd["score"] = quantize4(det.score);
      j["detections"].push_back(std::move(jd));
    }
    out << j.dump() << '\n';
  }
}

std::vector<LabelRecord> read_ndjson_labels(std::istream& in) {
  return read_ndjson<LabelRecord>(in, [](const json& j) {
    LabelRecord r;
    r.image = require<std::string>(j, "image");
    r.mu = require<double>(j, "mu");
    r.scale = require<int>(j, "scale");
    for (const auto& ji : j.value("instances", json::array())) {
      LabelInstanceRecord inst;
      inst.pmd = require<double>(ji, "pmd");
      inst.ignore = ji.value("ignore", false);
      for (const auto& jc : ji.value("centers", json::array())) {
        CenterRecord c;
        c.x = require<double>(jc, "x");
        c.y = require<double>(jc, "y");
        c.pmd = require<double>(jc, "pmd");
        const auto rd = require<std::vector<double>>(jc, "rd");
        if (rd.size() != 8) {
          throw json::other_error::create(501, "rd must have 8 entries", nullptr);
        }
        std::copy(rd.begin(), rd.end(), c.rd.begin());
        inst.centers.push_back(c);
      }
      r.instances.push_back(std::move(inst));
    }
    return r;
  });
}

void write_ndjson_labels(std::ostream& out, const std::vector<LabelRecord>& records) {
  for (const auto& r : records) {
    json j;
    j["image"] = r.image;
    j["mu"] = r.mu;
    j["scale"] = r.scale;
    j["instances"] = json::array();
    for (const auto& inst : r.instances) {
      json ji;
      ji["pmd"] = quantize4(inst.pmd);
      ji["ignore"] = inst.ignore;
      ji["centers"] = json::array();
      for (const auto& c : inst.centers) {
        json jc;
        jc["x"] = quantize4(c.x);
        jc["y"] = quantize4(c.y);
        jc["pmd"] = quantize4(c.pmd);
        json rd = json::array();
        for (double v : c.rd) rd.push_back(quantize4(v));
        jc["rd"] = std::move(rd);
        ji["centers"].push_back(std::move(jc));
      }
      j["instances"].push_back(std::move(ji));
    }
    out << j.dump() << '\n';
  }
}

namespace {

// PGM header token reader; skips whitespace and # comments.
std::string next_pgm_token(std::istream& in) {
  std::string token;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

}  // namespace

BinaryGrid read_pgm(std::istream& in) {
  if (next_pgm_token(in) != "P5") throw BadMagic("not a P5 PGM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_pgm_token(in));
    h = std::stoi(next_pgm_token(in));
    maxval = std::stoi(next_pgm_token(in));
  } catch (const std::exception&) {
    throw BadDimensions("malformed PGM header");
  }
  if (w < 1 || h < 1) throw BadDimensions("PGM dimensions must be >= 1");
  if (maxval != 255) throw ValueOutOfRange("binary PGM requires maxval 255");

  BinaryGrid grid(h, w);
  std::vector<char> buf(static_cast<std::size_t>(w) * h);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw BadDimensions("PGM payload truncated");
  }
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const auto v = static_cast<unsigned char>(buf[i]);
    if (v == 0) {
      grid.cells[i] = 0;
    } else if (v == 255) {
      grid.cells[i] = 1;
    } else {
      throw ValueOutOfRange("binary PGM cell is neither 0 nor 255");
    }
  }
  return grid;
}

void write_pgm(std::ostream& out, const BinaryGrid& grid) {
  out << "P5\n" << grid.width << ' ' << grid.height << "\n255\n";
  std::vector<char> buf(grid.cells.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    buf[i] = grid.cells[i] ? static_cast<char>(255) : 0;
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

SoftGrid read_softmask(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic)) throw BadMagic("empty soft mask");
  if (magic == "SOFTMASK v1\r") magic.pop_back();
  if (magic != "SOFTMASK v1") throw BadMagic("not a SOFTMASK v1 file");
  std::string dims;
  if (!std::getline(in, dims)) throw BadDimensions("missing dimension line");
  int w = 0, h = 0;
  if (std::sscanf(dims.c_str(), "%d %d", &w, &h) != 2 || w < 1 || h < 1) {
    throw BadDimensions("malformed soft mask dimensions");
  }

  SoftGrid grid(h, w);
  std::vector<char> buf(static_cast<std::size_t>(w) * h * 4);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw BadDimensions("soft mask payload truncated");
  }
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    float f;
    std::memcpy(&f, buf.data() + 4 * i, 4);
    if (!(f >= 0.0f && f <= 1.0f)) throw ValueOutOfRange("soft mask cell outside [0,1]");
    grid.cells[i] = static_cast<double>(f);
  }
  return grid;
}

void write_softmask(std::ostream& out, const SoftGrid& grid) {
  out << "SOFTMASK v1\n" << grid.width << ' ' << grid.height << '\n';
  std::vector<char> buf(grid.cells.size() * 4);
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    const float f = static_cast<float>(grid.cells[i]);
    std::memcpy(buf.data() + 4 * i, &f, 4);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

}  // namespace cmtext
