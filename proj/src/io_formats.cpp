#include "opph/io_formats.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "opph/log.hpp"

namespace opph {

namespace fs = std::filesystem;

// --- file helpers -------------------------------------------------------------

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(path.string() + ": write failed");
}

void write_text(const fs::path& path, std::string_view text) {
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

namespace {

std::uint32_t load_u32le(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

void store_u32le(std::uint32_t v, std::vector<std::uint8_t>& out) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

std::string src(std::string_view s) { return std::string(s); }

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits text into lines, dropping a trailing '\r' on each.
std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    auto line = text.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = pos + 1;
  }
  return out;
}

template <class T>
bool parse_value(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// --- .flo -------------------------------------------------------------------

FlowField read_flo(std::span<const std::uint8_t> bytes, std::string_view source) {
  if (bytes.size() < 4) throw TruncationError(src(source) + ": .flo header truncated");
  if (std::memcmp(bytes.data(), "PIEH", 4) != 0) {
    throw FormatError(src(source) + ": bad .flo magic (expected \"PIEH\")");
  }
  if (bytes.size() < 12) throw TruncationError(src(source) + ": .flo header truncated");
  const auto width = static_cast<std::int32_t>(load_u32le(bytes.data() + 4));
  const auto height = static_cast<std::int32_t>(load_u32le(bytes.data() + 8));
  if (width <= 0 || height <= 0) {
    throw FormatError(src(source) + ": .flo dimensions must be positive, got " +
                      std::to_string(width) + "x" + std::to_string(height));
  }
  const std::uint64_t count = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  const std::uint64_t need = 12 + count * 8;
  if (bytes.size() < need) {
    throw TruncationError(src(source) + ": .flo payload truncated (" + std::to_string(bytes.size()) +
                          " of " + std::to_string(need) + " bytes)");
  }
  if (bytes.size() > need) {
    throw FormatError(src(source) + ": " + std::to_string(bytes.size() - need) +
                      " trailing bytes after .flo payload");
  }
  std::vector<float> vx(count), vy(count);
  std::size_t unknown = 0;
  const std::uint8_t* p = bytes.data() + 12;
  for (std::uint64_t i = 0; i < count; ++i, p += 8) {
    float x = std::bit_cast<float>(load_u32le(p));
    float y = std::bit_cast<float>(load_u32le(p + 4));
    // NaN counts as unknown too.
    if (!(std::abs(x) <= kFloUnknownThreshold)) {
      x = 0.0f;
      ++unknown;
    }
    if (!(std::abs(y) <= kFloUnknownThreshold)) {
      y = 0.0f;
      ++unknown;
    }
    vx[i] = x;
    vy[i] = y;
  }
  if (unknown) {
    log_warning(src(source) + ": " + std::to_string(unknown) + " unknown flow values set to zero");
  }
  return FlowField(width, height, std::move(vx), std::move(vy));
}

std::vector<std::uint8_t> write_flo(const FlowField& flow) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + flow.size() * 8);
  store_u32le(std::bit_cast<std::uint32_t>(kFloMagic), out);
  store_u32le(static_cast<std::uint32_t>(flow.width()), out);
  store_u32le(static_cast<std::uint32_t>(flow.height()), out);
  auto vx = flow.vx();
  auto vy = flow.vy();
  for (std::size_t i = 0; i < flow.size(); ++i) {
    store_u32le(std::bit_cast<std::uint32_t>(vx[i]), out);
    store_u32le(std::bit_cast<std::uint32_t>(vy[i]), out);
  }
  return out;
}

FlowField read_flo_file(const fs::path& path) { return read_flo(read_bytes(path), path.string()); }

void write_flo_file(const fs::path& path, const FlowField& flow) { write_bytes(path, write_flo(flow)); }

// --- raster images ----------------------------------------------------------

namespace {

Image8 decode_pnm(std::span<const std::uint8_t> bytes, std::string_view source) {
  const int channels = bytes[1] == '6' ? 3 : 1;
  std::size_t pos = 2;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* what) {
    skip_space();
    long v = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > (1L << 30)) throw FormatError(src(source) + ": " + what + " out of range");
      ++pos;
    }
    if (pos == start) throw FormatError(src(source) + ": missing " + what + " in PNM header");
    return v;
  };
  const long width = read_int("width");
  const long height = read_int("height");
  const long maxval = read_int("maxval");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw FormatError(src(source) + ": malformed PNM header");
  }
  ++pos;
  if (width <= 0 || height <= 0) throw FormatError(src(source) + ": non-positive image size");
  if (maxval != 255) {
    throw FormatError(src(source) + ": unsupported bit depth (maxval " + std::to_string(maxval) +
                      ", only 8-bit images are supported)");
  }
  const std::size_t need = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - pos < need) throw TruncationError(src(source) + ": PNM pixel data truncated");
  Image8 img;
  img.width = static_cast<int>(width);
  img.height = static_cast<int>(height);
  img.channels = channels;
  img.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                  bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return img;
}

Image8 decode_png(std::span<const std::uint8_t> bytes, std::string_view source) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw FormatError(src(source) + ": invalid PNG (" + image.message + ")");
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw FormatError(src(source) + ": unsupported bit depth (16-bit PNG)");
  }
  const bool color = image.format & PNG_FORMAT_FLAG_COLOR;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Image8 img;
  img.width = static_cast<int>(image.width);
  img.height = static_cast<int>(image.height);
  img.channels = color ? 3 : 1;
  img.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, img.data.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw FormatError(src(source) + ": PNG decode failed (" + msg + ")");
  }
  return img;
}

}  // namespace

Image8 decode_image(std::span<const std::uint8_t> bytes, std::string_view source) {
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '6' || bytes[1] == '5')) {
    return decode_pnm(bytes, source);
  }
  static constexpr std::uint8_t png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), png_sig, 8) == 0) {
    return decode_png(bytes, source);
  }
  throw FormatError(src(source) + ": unrecognised image format (expected binary PPM/PGM or PNG)");
}

Image8 read_image(const fs::path& path) {
  if (!fs::exists(path)) throw FormatError(path.string() + ": file not found");
  return decode_image(read_bytes(path), path.string());
}

std::vector<std::uint8_t> encode_pnm(const Image8& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw InvalidArgument("encode_pnm: channels must be 1 or 3");
  }
  const std::string header = std::string(image.channels == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(image.width) + " " + std::to_string(image.height) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.data.begin(), image.data.end());
  return out;
}

void write_pnm(const fs::path& path, const Image8& image) { write_bytes(path, encode_pnm(image)); }

void write_png(const fs::path& path, const Image8& image) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, image.data.data(), 0, nullptr)) {
    throw FormatError(path.string() + ": PNG write failed (" + png.message + ")");
  }
}

Frame read_frame(const fs::path& path, int index, double fps) {
  Image8 img = read_image(path);
  if (img.channels == 1) {
    std::vector<std::uint8_t> rgb(img.data.size() * 3);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = img.data[i];
    }
    img.data = std::move(rgb);
  }
  return Frame(img.width, img.height, std::move(img.data), index, fps);
}

void write_frame(const fs::path& path, const Frame& frame) {
  Image8 img{frame.width(), frame.height(), 3,
             std::vector<std::uint8_t>(frame.pixels().begin(), frame.pixels().end())};
  if (path.extension() == ".png") {
    write_png(path, img);
  } else {
    write_pnm(path, img);
  }
}

namespace {

Image8 read_gray(const fs::path& path) {
  Image8 img = read_image(path);
  if (img.channels != 1) {
    throw FormatError(path.string() + ": mask images must be single-channel grayscale");
  }
  return img;
}

}  // namespace

BodyMask read_mask(const fs::path& path) {
  Image8 img = read_gray(path);
  for (auto& v : img.data) v = v != 0;
  return BodyMask(img.width, img.height, std::move(img.data));
}

PartMask read_parts(const fs::path& path) {
  Image8 img = read_gray(path);
  return PartMask(img.width, img.height,
                  std::vector<std::uint16_t>(img.data.begin(), img.data.end()));
}

void write_mask(const fs::path& path, const BodyMask& mask) {
  Image8 img{mask.width(), mask.height(), 1, {}};
  img.data.reserve(mask.size());
  for (std::uint8_t v : mask.values()) img.data.push_back(v ? 255 : 0);
  if (path.extension() == ".png") {
    write_png(path, img);
  } else {
    write_pnm(path, img);
  }
}

// --- pose and speed CSV -----------------------------------------------------

PoseTrack parse_pose(std::string_view text, double fps, std::string_view source) {
  const auto lines = lines_of(text);
  std::size_t ln = 0;
  while (ln < lines.size() && (trim(lines[ln]).empty() || lines[ln].front() == '#')) ++ln;
  if (ln == lines.size()) throw ParseError(src(source), ln, "missing header");
  if (trim(lines[ln]) != "frame,joint,x,y,present") {
    throw ParseError(src(source), ln + 1, "expected header 'frame,joint,x,y,present'");
  }
  std::vector<std::vector<Joint>> frames;
  for (++ln; ln < lines.size(); ++ln) {
    const auto line = trim(lines[ln]);
    if (line.empty()) continue;
    const std::size_t lineno = ln + 1;
    const auto cells = split(line, ',');
    if (cells.size() != 5) throw ParseError(src(source), lineno, "expected 5 fields");
    long frame = -1, joint = -1, present = -1;
    Joint j;
    if (!parse_value(cells[0], frame) || frame < 0) {
      throw ParseError(src(source), lineno, "bad frame index");
    }
    if (!parse_value(cells[1], joint) || joint < 0) {
      throw ParseError(src(source), lineno, "bad joint index");
    }
    if (!parse_value(cells[2], j.x) || !parse_value(cells[3], j.y) || !std::isfinite(j.x) ||
        !std::isfinite(j.y)) {
      throw ParseError(src(source), lineno, "non-numeric joint coordinate");
    }
    if (!parse_value(cells[4], present) || (present != 0 && present != 1)) {
      throw ParseError(src(source), lineno, "present flag must be 0 or 1");
    }
    j.present = present == 1;

    const long current = static_cast<long>(frames.size()) - 1;
    if (frame == current + 1) {
      if (!frames.empty() && frames.back().size() != frames.front().size()) {
        throw ParseError(src(source), lineno,
                         "frame " + std::to_string(current) + " has " +
                             std::to_string(frames.back().size()) + " joints, expected " +
                             std::to_string(frames.front().size()));
      }
      frames.emplace_back();
    } else if (frame != current) {
      throw ParseError(src(source), lineno,
                       "frame " + std::to_string(current + 1) + " missing (found frame " +
                           std::to_string(frame) + ")");
    }
    if (joint != static_cast<long>(frames.back().size())) {
      throw ParseError(src(source), lineno,
                       "expected joint " + std::to_string(frames.back().size()) + ", found " +
                           std::to_string(joint));
    }
    frames.back().push_back(j);
  }
  if (frames.empty()) throw ParseError(src(source), lines.size(), "no pose records");
  if (frames.back().size() != frames.front().size()) {
    throw ParseError(src(source), lines.size(),
                     "last frame has " + std::to_string(frames.back().size()) +
                         " joints, expected " + std::to_string(frames.front().size()));
  }
  return PoseTrack(std::move(frames), fps);
}

PoseTrack read_pose(const fs::path& path, double fps) {
  return parse_pose(read_text(path), fps, path.string());
}

std::string format_pose(const PoseTrack& track) {
  std::string out = "frame,joint,x,y,present\n";
  for (std::size_t t = 0; t < track.frame_count(); ++t) {
    const auto& f = track.frame(t);
    for (std::size_t k = 0; k < f.size(); ++k) {
      out += std::to_string(t) + "," + std::to_string(k) + "," + format_number(f[k].x) + "," +
             format_number(f[k].y) + "," + (f[k].present ? "1" : "0") + "\n";
    }
  }
  return out;
}

SpeedSeries parse_gt_speed(std::string_view text, double fps, std::string_view source) {
  const auto lines = lines_of(text);
  std::size_t ln = 0;
  while (ln < lines.size() && (trim(lines[ln]).empty() || lines[ln].front() == '#')) ++ln;
  if (ln == lines.size()) throw ParseError(src(source), ln, "missing header");
  if (trim(lines[ln]) != "frame,speed") {
    throw ParseError(src(source), ln + 1, "expected header 'frame,speed'");
  }
  std::vector<double> values;
  for (++ln; ln < lines.size(); ++ln) {
    const auto line = trim(lines[ln]);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 2) throw ParseError(src(source), ln + 1, "expected 2 fields");
    long frame = -1;
    double speed = 0.0;
    if (!parse_value(cells[0], frame)) throw ParseError(src(source), ln + 1, "bad frame index");
    if (frame != static_cast<long>(values.size())) {
      throw ParseError(src(source), ln + 1,
                       "expected frame " + std::to_string(values.size()) + ", found " +
                           std::to_string(frame));
    }
    if (!parse_value(cells[1], speed) || !std::isfinite(speed)) {
      throw ParseError(src(source), ln + 1, "non-numeric speed");
    }
    if (speed < 0.0) throw ParseError(src(source), ln + 1, "negative speed");
    values.push_back(speed);
  }
  return SpeedSeries(std::move(values), fps);
}

SpeedSeries read_gt_speed(const fs::path& path, double fps) {
  return parse_gt_speed(read_text(path), fps, path.string());
}

std::string format_gt_speed(const SpeedSeries& series) {
  std::string out = "frame,speed\n";
  for (std::size_t t = 0; t < series.size(); ++t) {
    out += std::to_string(t) + "," + format_number(series[t]) + "\n";
  }
  return out;
}

void write_gt_speed(const fs::path& path, const SpeedSeries& series) {
  write_text(path, format_gt_speed(series));
}

// --- manifests ---------------------------------------------------------------

void SequenceManifest::validate() const {
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    throw InvalidArgument("manifest '" + id + "': fps must be positive");
  }
  const std::size_t n = frames.size();
  if (!masks.empty() && masks.size() != n && masks.size() + 1 != n) {
    throw InvalidArgument("manifest '" + id + "': " + std::to_string(masks.size()) +
                          " masks for " + std::to_string(n) +
                          " frames (expected one per frame or one per frame pair)");
  }
  if (!flows.empty() && flows.size() + 1 != n && flows.size() != n) {
    throw InvalidArgument("manifest '" + id + "': " + std::to_string(flows.size()) +
                          " flow files for " + std::to_string(n) + " frames");
  }
}

SequenceManifest parse_manifest(std::string_view json_text, const fs::path& base_dir,
                                std::string_view source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(src(source) + ": invalid JSON (" + e.what() + ")");
  }
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_relative() ? base_dir / path : path;
  };
  SequenceManifest m;
  try {
    m.id = j.at("id").get<std::string>();
    m.fps = j.at("fps").get<double>();
    for (const auto& f : j.at("frames")) m.frames.push_back(resolve(f.get<std::string>()));
    if (j.contains("masks")) {
      for (const auto& f : j["masks"]) m.masks.push_back(resolve(f.get<std::string>()));
    }
    if (j.contains("flows")) {
      for (const auto& f : j["flows"]) m.flows.push_back(resolve(f.get<std::string>()));
    }
    if (j.contains("pose") && !j["pose"].is_null()) m.pose = resolve(j["pose"].get<std::string>());
    if (j.contains("gt_speed") && !j["gt_speed"].is_null()) {
      m.gt_speed = resolve(j["gt_speed"].get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(src(source) + ": bad manifest field (" + e.what() + ")");
  }
  if (m.id.empty() || m.id.find_first_of(",\n") != std::string::npos) {
    throw FormatError(src(source) + ": manifest id must be non-empty and free of commas");
  }
  try {
    m.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(src(source) + ": " + e.what());
  }
  return m;
}

SequenceManifest read_manifest(const fs::path& path) {
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return parse_manifest(read_text(path), base, path.string());
}

void write_manifest(const fs::path& path, const SequenceManifest& manifest) {
  manifest.validate();
  const fs::path base = fs::absolute(path).parent_path();
  auto rel = [&](const fs::path& p) {
    const fs::path r = fs::absolute(p).lexically_relative(base);
    if (!r.empty() && *r.begin() != "..") return r.generic_string();
    return fs::absolute(p).generic_string();
  };
  nlohmann::ordered_json j;
  j["id"] = manifest.id;
  j["fps"] = manifest.fps;
  auto list = [&](const std::vector<fs::path>& paths) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : paths) arr.push_back(rel(p));
    return arr;
  };
  j["frames"] = list(manifest.frames);
  if (!manifest.masks.empty()) j["masks"] = list(manifest.masks);
  if (!manifest.flows.empty()) j["flows"] = list(manifest.flows);
  if (manifest.pose) j["pose"] = rel(*manifest.pose);
  if (manifest.gt_speed) j["gt_speed"] = rel(*manifest.gt_speed);
  write_text(path, j.dump(2) + "\n");
}

std::vector<Frame> read_frames(const SequenceManifest& manifest) {
  if (manifest.frames.empty()) {
    throw InvalidArgument("manifest '" + manifest.id + "': no frames listed");
  }
  std::vector<Frame> frames;
  frames.reserve(manifest.frames.size());
  for (std::size_t k = 0; k < manifest.frames.size(); ++k) {
    Frame f = read_frame(manifest.frames[k], static_cast<int>(k), manifest.fps);
    if (!frames.empty() &&
        (f.width() != frames.front().width() || f.height() != frames.front().height())) {
      throw FormatError(manifest.frames[k].string() + ": frame is " + std::to_string(f.width()) +
                        "x" + std::to_string(f.height()) + ", expected " +
                        std::to_string(frames.front().width()) + "x" +
                        std::to_string(frames.front().height()));
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<BodyMask> read_pair_masks(const SequenceManifest& manifest) {
  if (manifest.masks.empty()) {
    throw InvalidArgument("manifest '" + manifest.id + "': no masks listed");
  }
  std::vector<BodyMask> masks;
  for (const auto& p : manifest.masks) {
    BodyMask m = read_mask(p);
    if (!masks.empty() && !m.same_shape(masks.front().width(), masks.front().height())) {
      throw FormatError(p.string() + ": mask size differs from the first mask");
    }
    masks.push_back(std::move(m));
  }
  if (masks.size() == manifest.frames.size()) {
    std::vector<BodyMask> pairs;
    pairs.reserve(masks.size() - 1);
    for (std::size_t k = 0; k + 1 < masks.size(); ++k) {
      pairs.push_back(combine_masks(masks[k], masks[k + 1]));
    }
    return pairs;
  }
  return masks;
}

std::vector<FlowField> read_flows(const SequenceManifest& manifest) {
  if (manifest.flows.empty()) {
    throw InvalidArgument("manifest '" + manifest.id + "': no flow files listed");
  }
  const std::size_t pairs = manifest.frames.empty() ? manifest.flows.size()
                                                    : manifest.frames.size() - 1;
  std::vector<FlowField> flows;
  for (std::size_t k = 0; k < std::min(pairs, manifest.flows.size()); ++k) {
    flows.push_back(read_flo_file(manifest.flows[k]));
  }
  return flows;
}

// --- configuration -----------------------------------------------------------

ConfigOverrides ConfigOverrides::merged_with(const ConfigOverrides& other) const {
  ConfigOverrides out = *this;
  if (other.theta) out.theta = other.theta;
  if (other.n) out.n = other.n;
  if (other.m) out.m = other.m;
  if (other.min_active_pixels) out.min_active_pixels = other.min_active_pixels;
  if (!other.filters.empty()) out.filters = other.filters;
  return out;
}

OpphConfig ConfigOverrides::resolve(int width, int height, double fps) const {
  const OpphConfig base = default_config(width, height, fps);
  return OpphConfig(theta.value_or(base.theta()), n.value_or(base.n()), m.value_or(base.m()),
                    min_active_pixels.value_or(base.min_active_pixels()));
}

ConfigOverrides parse_config(std::string_view text, std::string_view source) {
  ConfigOverrides out;
  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto line = lines[ln];
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(src(source), ln + 1, "expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    auto as_int = [&] {
      int v = 0;
      if (!parse_value(value, v)) {
        throw ParseError(src(source), ln + 1, "'" + std::string(key) + "' needs an integer");
      }
      return v;
    };
    if (key == "theta") {
      out.theta = as_int();
    } else if (key == "n") {
      out.n = as_int();
    } else if (key == "m") {
      out.m = as_int();
    } else if (key == "min_active_pixels") {
      out.min_active_pixels = as_int();
    } else if (key == "filter") {
      try {
        out.filters.push_back(FilterSpec::parse(std::string(value)));
      } catch (const InvalidArgument& e) {
        throw ParseError(src(source), ln + 1, e.what());
      }
    } else {
      throw ParseError(src(source), ln + 1, "unknown key '" + std::string(key) + "'");
    }
  }
  return out;
}

ConfigOverrides read_config(const fs::path& path) { return parse_config(read_text(path), path.string()); }

std::string format_config(const OpphConfig& cfg) {
  return "theta = " + std::to_string(cfg.theta()) + "\nn = " + std::to_string(cfg.n()) +
         "\nm = " + std::to_string(cfg.m()) +
         "\nmin_active_pixels = " + std::to_string(cfg.min_active_pixels()) + "\n";
}

// --- CSV reports ---------------------------------------------------------------

void CsvTable::add_meta(std::string key, std::string value) {
  meta_.emplace_back(std::move(key), std::move(value));
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) {
    throw InvalidArgument("CsvTable: row has " + std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(columns_.size()));
  }
  for (const auto& c : cells) {
    if (c.find_first_of(",\"\r\n") != std::string::npos) {
      throw InvalidArgument("CsvTable: cell '" + c + "' holds a separator or quote");
    }
  }
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  for (const auto& [k, v] : meta_) out += "# " + k + "=" + v + "\n";
  auto join = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  join(columns_);
  for (const auto& r : rows_) join(r);
  return out;
}

void CsvTable::write(const fs::path& path) const { write_text(path, str()); }

CsvTable CsvTable::parse(std::string_view text, std::string_view source) {
  const auto lines = lines_of(text);
  std::size_t ln = 0;
  std::vector<std::pair<std::string, std::string>> meta;
  for (; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    if (lines[ln].front() != '#') break;
    auto body = trim(lines[ln].substr(1));
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) continue;
    meta.emplace_back(std::string(body.substr(0, eq)), std::string(body.substr(eq + 1)));
  }
  if (ln == lines.size()) throw ParseError(src(source), ln, "missing column header");
  std::vector<std::string> columns;
  for (auto c : split(lines[ln], ',')) columns.emplace_back(trim(c));
  CsvTable table(std::move(columns));
  table.meta_ = std::move(meta);
  for (++ln; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    std::vector<std::string> cells;
    for (auto c : split(lines[ln], ',')) cells.emplace_back(trim(c));
    if (cells.size() != table.columns_.size()) {
      throw ParseError(src(source), ln + 1,
                       "expected " + std::to_string(table.columns_.size()) + " fields");
    }
    table.rows_.push_back(std::move(cells));
  }
  return table;
}

CsvTable CsvTable::read(const fs::path& path) { return parse(read_text(path), path.string()); }

}  // namespace opph
