#pragma once

// File codecs (PNG rasters, FLO2 flow, FTEN feature tensors), JSON schemas
// (manifest, palette, pose, pools, run config) and corpus statistics.
// Byte layouts are documented in docs/formats.md.

#include "occlumix/core_types.hpp"
#include "occlumix/flow_metrics.hpp"
#include "occlumix/generative_losses.hpp"
#include "occlumix/texture_glcm.hpp"

#include <json.hpp>
#include <png.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace occlumix {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Raw bytes
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> read_file_bytes(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const fs::path &path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw InputError("cannot write " + path.string());
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw InputError("write failed for " + path.string());
}

inline void write_text_file(const fs::path &path, const std::string &text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

inline json read_json_file(const fs::path &path) {
  const auto bytes = read_file_bytes(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error &e) {
    throw InputError("JSON parse error in " + path.string() + ": " + e.what());
  }
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4)
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

// ---------------------------------------------------------------------------
// Little-endian binary helpers
// ---------------------------------------------------------------------------

namespace detail {

class ByteWriter {
public:
  void magic(const char (&m)[5]) { bytes_.insert(bytes_.end(), m, m + 4); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
      bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  void expect_magic(const char (&m)[5]) {
    need(4);
    if (std::memcmp(bytes_.data() + pos_, m, 4) != 0)
      throw InputError(what_ + ": bad magic, expected \"" + std::string(m, 4) + "\"");
    pos_ += 4;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw InputError(what_ + ": truncated payload");
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void expect_end() const {
    if (pos_ != bytes_.size())
      throw InputError(what_ + ": " + std::to_string(bytes_.size() - pos_) + " trailing bytes");
  }

private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

} // namespace detail

// ---------------------------------------------------------------------------
// FLO2 flow fields
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> encode_flow(const FlowField &flow) {
  detail::ByteWriter w;
  w.magic("FLO2");
  w.u32(static_cast<std::uint32_t>(flow.width()));
  w.u32(static_cast<std::uint32_t>(flow.height()));
  for (double v : flow.data())
    w.f32(v);
  return w.take();
}

inline FlowField decode_flow(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "FLO2");
  r.expect_magic("FLO2");
  const std::uint32_t w = r.u32();
  const std::uint32_t h = r.u32();
  const std::uint64_t n = static_cast<std::uint64_t>(w) * h * 2;
  if (n > r.remaining() / 4)
    throw InputError("FLO2: truncated payload");
  std::vector<double> data(n);
  for (auto &v : data)
    v = r.f32();
  r.expect_end();
  return FlowField(static_cast<int>(w), static_cast<int>(h), std::move(data));
}

inline FlowField load_flow(const fs::path &path) {
  try {
    return decode_flow(read_file_bytes(path));
  } catch (const InputError &e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline void save_flow(const fs::path &path, const FlowField &flow) { write_file_bytes(path, encode_flow(flow)); }

// ---------------------------------------------------------------------------
// FTEN feature tensors
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> encode_features(const FeatureStack &stack) {
  detail::ByteWriter w;
  w.magic("FTEN");
  w.u32(static_cast<std::uint32_t>(stack.size()));
  for (const auto &m : stack) {
    w.u32(static_cast<std::uint32_t>(m.channels()));
    w.u32(static_cast<std::uint32_t>(m.height()));
    w.u32(static_cast<std::uint32_t>(m.width()));
    for (double v : m.data())
      w.f32(v);
  }
  return w.take();
}

inline FeatureStack decode_features(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "FTEN");
  r.expect_magic("FTEN");
  const std::uint32_t levels = r.u32();
  FeatureStack stack;
  for (std::uint32_t l = 0; l < levels; ++l) {
    const std::uint32_t c = r.u32();
    const std::uint32_t h = r.u32();
    const std::uint32_t w = r.u32();
    const std::uint64_t n = static_cast<std::uint64_t>(c) * h * w;
    if (n > r.remaining() / 4)
      throw InputError("FTEN: truncated payload");
    std::vector<double> data(n);
    for (auto &v : data)
      v = r.f32();
    stack.emplace_back(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w), std::move(data));
  }
  r.expect_end();
  return stack;
}

inline FeatureStack load_features(const fs::path &path) {
  try {
    return decode_features(read_file_bytes(path));
  } catch (const InputError &e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline void save_features(const fs::path &path, const FeatureStack &stack) {
  write_file_bytes(path, encode_features(stack));
}

/// All levels concatenated in file order.
inline std::vector<double> flatten(const FeatureStack &stack) {
  std::vector<double> out;
  for (const auto &m : stack)
    out.insert(out.end(), m.data().begin(), m.data().end());
  return out;
}

// ---------------------------------------------------------------------------
// PNG
// ---------------------------------------------------------------------------

/// 8-bit raster as stored in a PNG (1 = gray, 3 = RGB).
struct Raster8 {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;
};

namespace detail {

/// Walks the chunk list and rejects truncated streams and bytes after IEND.
inline void check_png_framing(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0)
    throw InputError("PNG: bad signature");
  std::size_t pos = 8;
  for (;;) {
    if (bytes.size() - pos < 12)
      throw InputError("PNG: truncated payload");
    const std::uint32_t len = (std::uint32_t{bytes[pos]} << 24) | (std::uint32_t{bytes[pos + 1]} << 16) |
                              (std::uint32_t{bytes[pos + 2]} << 8) | std::uint32_t{bytes[pos + 3]};
    const bool iend = std::memcmp(bytes.data() + pos + 4, "IEND", 4) == 0;
    if (bytes.size() - pos - 12 < len)
      throw InputError("PNG: truncated payload");
    pos += 12 + static_cast<std::size_t>(len);
    if (iend)
      break;
  }
  if (pos != bytes.size())
    throw InputError("PNG: " + std::to_string(bytes.size() - pos) + " trailing bytes after IEND");
}

struct PngImageGuard {
  png_image *img;
  ~PngImageGuard() { png_image_free(img); }
};

} // namespace detail

inline Raster8 decode_png(std::span<const std::uint8_t> bytes) {
  detail::check_png_framing(bytes);
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  detail::PngImageGuard guard{&img};
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
    throw InputError(std::string("PNG: ") + img.message);
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Raster8 out;
  out.width = static_cast<int>(img.width);
  out.height = static_cast<int>(img.height);
  out.channels = color ? 3 : 1;
  out.data.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.data.data(), 0, nullptr))
    throw InputError(std::string("PNG: ") + img.message);
  return out;
}

inline std::vector<std::uint8_t> encode_png(const Raster8 &r) {
  detail::require(r.channels == 1 || r.channels == 3, "PNG output needs 1 or 3 channels");
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(r.width);
  img.height = static_cast<png_uint_32>(r.height);
  img.format = r.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, r.data.data(), 0, nullptr))
    throw InputError(std::string("PNG encode: ") + img.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, r.data.data(), 0, nullptr))
    throw InputError(std::string("PNG encode: ") + img.message);
  out.resize(size);
  return out;
}

inline Raster8 load_png(const fs::path &path) {
  try {
    return decode_png(read_file_bytes(path));
  } catch (const InputError &e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

/// 8-bit values map to v / 255.
inline ImageBuffer to_image(const Raster8 &r) {
  std::vector<double> data(r.data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    data[i] = r.data[i] / 255.0;
  return ImageBuffer(r.width, r.height, r.channels, std::move(data));
}

/// Values map to round(v * 255).
inline Raster8 to_raster8(const ImageBuffer &img) {
  detail::require(img.channels() == 1 || img.channels() == 3, "8-bit output needs 1 or 3 channels");
  Raster8 r{img.width(), img.height(), img.channels(), std::vector<std::uint8_t>(img.data().size())};
  for (std::size_t i = 0; i < r.data.size(); ++i)
    r.data[i] = static_cast<std::uint8_t>(std::lround(img.data()[i] * 255.0));
  return r;
}

inline ImageBuffer load_image(const fs::path &path) { return to_image(load_png(path)); }

inline void save_image(const fs::path &path, const ImageBuffer &img) {
  write_file_bytes(path, encode_png(to_raster8(img)));
}

inline Raster8 load_single_channel(const fs::path &path) {
  Raster8 r = load_png(path);
  if (r.channels != 1)
    throw InputError(path.string() + ": expected a single-channel PNG");
  return r;
}

/// Files holding only 0/1 are read as-is; otherwise values >= 128 are set.
inline BinaryMask load_mask(const fs::path &path) {
  Raster8 r = load_single_channel(path);
  const auto top = r.data.empty() ? 0 : *std::max_element(r.data.begin(), r.data.end());
  std::vector<std::uint8_t> bits(r.data.size());
  for (std::size_t i = 0; i < bits.size(); ++i)
    bits[i] = top <= 1 ? r.data[i] : (r.data[i] >= 128 ? 1 : 0);
  return BinaryMask(r.width, r.height, std::move(bits));
}

/// Written as 0 / 255.
inline void save_mask(const fs::path &path, const BinaryMask &mask) {
  Raster8 r{mask.width(), mask.height(), 1, std::vector<std::uint8_t>(mask.pixel_count())};
  for (std::size_t i = 0; i < r.data.size(); ++i)
    r.data[i] = mask.data()[i] ? 255 : 0;
  write_file_bytes(path, encode_png(r));
}

inline LabelMap load_label_map(const fs::path &path, std::shared_ptr<const Palette> palette) {
  Raster8 r = load_single_channel(path);
  try {
    return LabelMap(r.width, r.height, std::move(r.data), std::move(palette));
  } catch (const InputError &e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline PartRegionMap load_region_map(const fs::path &path, int region_count = kDefaultRegionCount) {
  Raster8 r = load_single_channel(path);
  try {
    return PartRegionMap(r.width, r.height, std::move(r.data), region_count);
  } catch (const InputError &e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

template <IndexRaster R> void save_index_map(const fs::path &path, const R &map) {
  Raster8 r{map.width(), map.height(), 1, std::vector<std::uint8_t>(map.data().begin(), map.data().end())};
  write_file_bytes(path, encode_png(r));
}

/// Hash of an image's 8-bit representation (dimensions included). Used to
/// key externally computed feature files.
inline std::string content_hash(const ImageBuffer &img) {
  const Raster8 r = to_raster8(img);
  const std::uint32_t dims[3] = {static_cast<std::uint32_t>(r.width), static_cast<std::uint32_t>(r.height),
                                 static_cast<std::uint32_t>(r.channels)};
  std::uint64_t h = fnv1a64(std::span(reinterpret_cast<const std::uint8_t *>(dims), sizeof dims));
  return hex64(fnv1a64(r.data, h));
}

// ---------------------------------------------------------------------------
// Palette, pose, pools
// ---------------------------------------------------------------------------

/// Accepts either a flat {"name": id} object or
/// {"classes": {...}, "cloth": [names], "body": [names]}. Without explicit
/// groups, cloth = upper-clothes and body = hair, face, arms, pants (those
/// present).
inline Palette parse_palette(const json &j) {
  Palette p;
  const json &classes = j.contains("classes") ? j.at("classes") : j;
  if (!classes.is_object())
    throw InputError("palette must be a JSON object of class name -> id");
  for (const auto &[name, id] : classes.items()) {
    if (!id.is_number_integer() || id.get<int>() < 0 || id.get<int>() > 255)
      throw InputError("palette id for '" + name + "' must be an integer in 0..255");
    p.classes[name] = id.get<int>();
  }
  std::set<int> seen;
  for (const auto &kv : p.classes)
    if (!seen.insert(kv.second).second)
      throw InputError("palette id " + std::to_string(kv.second) + " is assigned to more than one class");

  auto group = [&](const char *key, std::initializer_list<const char *> defaults) {
    std::vector<int> ids;
    if (j.contains("classes") && j.contains(key)) {
      for (const auto &n : j.at(key))
        ids.push_back(p.id_of(n.get<std::string>()));
    } else {
      for (const char *n : defaults)
        if (p.classes.contains(n))
          ids.push_back(p.classes.at(n));
    }
    return ids;
  };
  p.cloth_ids = group("cloth", {"upper-clothes"});
  p.body_ids = group("body", {"hair", "face", "left-arm", "right-arm", "pants"});
  return p;
}

inline std::shared_ptr<const Palette> load_palette(const fs::path &path) {
  try {
    return std::make_shared<const Palette>(parse_palette(read_json_file(path)));
  } catch (const json::exception &e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline PoseKeypoints parse_pose(const json &j) {
  if (!j.is_array() || j.size() != kPoseJointCount)
    throw InputError("pose must be a JSON array of 18 [x, y, confidence] triples");
  PoseKeypoints pose;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto &t = j[i];
    if (!t.is_array() || t.size() != 3 || !t[0].is_number() || !t[1].is_number() || !t[2].is_number())
      throw InputError("pose joint " + std::to_string(i) + " must be [x, y, confidence]");
    Joint jt{t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
    if (!(jt.confidence >= 0.0 && jt.confidence <= 1.0))
      throw InputError("pose joint " + std::to_string(i) + " confidence must lie in [0, 1]");
    pose.joints[i] = jt;
  }
  return pose;
}

inline PoseKeypoints load_pose(const fs::path &path) {
  try {
    return parse_pose(read_json_file(path));
  } catch (const InputError &e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline json to_json(const TexturePools &pools) { return json{{"complex", pools.complex}, {"simple", pools.simple}}; }

inline TexturePools parse_pools(const json &j) {
  TexturePools p;
  try {
    p.complex = j.at("complex").get<std::vector<std::string>>();
    p.simple = j.at("simple").get<std::vector<std::string>>();
  } catch (const json::exception &e) {
    throw InputError(std::string("pools file: ") + e.what());
  }
  std::set<std::string> complex(p.complex.begin(), p.complex.end());
  for (const auto &id : p.simple)
    if (complex.contains(id))
      throw InputError("pools file: id '" + id + "' is in both pools");
  return p;
}

inline TexturePools load_pools(const fs::path &path) { return parse_pools(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

inline constexpr std::array<const char *, 8> kManifestPathFields{
    "person_image", "cloth_image", "cloth_mask", "label_map", "pose", "region_map", "worn_cloth_mask",
    "warped_cloth_mask"};

struct ManifestEntry {
  std::string id;
  std::map<std::string, std::string> paths; // field -> path as written
  json extra = json::object();              // unrecognized keys, kept verbatim

  std::optional<std::string> get(const std::string &field) const {
    auto it = paths.find(field);
    if (it == paths.end())
      return std::nullopt;
    return it->second;
  }
};

struct DatasetManifest {
  fs::path base_dir; // relative paths resolve against this
  std::vector<ManifestEntry> entries;

  fs::path resolve(const std::string &p) const {
    fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }
  fs::path path_of(const ManifestEntry &e, const std::string &field) const {
    auto p = e.get(field);
    if (!p)
      throw InputError("manifest entry '" + e.id + "' has no '" + field + "'");
    return resolve(*p);
  }
  const ManifestEntry *find(const std::string &id) const {
    for (const auto &e : entries)
      if (e.id == id)
        return &e;
    return nullptr;
  }
};

inline bool valid_entry_id(const std::string &id) {
  return !id.empty() && id != "." && id != ".." && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
}

inline DatasetManifest parse_manifest(const json &j, fs::path base_dir = {},
                                      std::span<const std::string> required = {}) {
  if (!j.is_object() || !j.contains("entries") || !j.at("entries").is_array())
    throw InputError("manifest must be an object with an \"entries\" array");
  DatasetManifest m;
  m.base_dir = std::move(base_dir);
  std::set<std::string> ids;
  std::size_t index = 0;
  for (const auto &je : j.at("entries")) {
    if (!je.is_object())
      throw InputError("manifest entry #" + std::to_string(index) + " is not an object");
    if (!je.contains("id") || !je.at("id").is_string())
      throw InputError("manifest entry #" + std::to_string(index) + " is missing required field 'id'");
    ManifestEntry e;
    e.id = je.at("id").get<std::string>();
    if (!valid_entry_id(e.id))
      throw InputError("manifest id '" + e.id + "' may only use letters, digits, '-', '_' and '.'");
    if (!ids.insert(e.id).second)
      throw InputError("duplicate manifest id '" + e.id + "'");
    for (const auto &[key, value] : je.items()) {
      if (key == "id")
        continue;
      const bool known = std::find_if(kManifestPathFields.begin(), kManifestPathFields.end(),
                                      [&](const char *f) { return key == f; }) != kManifestPathFields.end();
      if (known) {
        if (!value.is_string())
          throw InputError("manifest entry '" + e.id + "': field '" + key + "' must be a path string");
        e.paths[key] = value.get<std::string>();
      } else {
        e.extra[key] = value;
      }
    }
    for (const auto &field : required) {
      auto p = e.get(field);
      if (!p)
        throw InputError("manifest entry '" + e.id + "' is missing required field '" + field + "'");
      if (!fs::exists(m.resolve(*p)))
        throw InputError("manifest entry '" + e.id + "': " + field + " file not found: " + m.resolve(*p).string());
    }
    m.entries.push_back(std::move(e));
    ++index;
  }
  return m;
}

inline DatasetManifest load_manifest(const fs::path &path, std::span<const std::string> required = {}) {
  json j;
  try {
    j = read_json_file(path);
  } catch (const InputError &e) {
    throw InputError(std::string("manifest parse error: ") + e.what());
  }
  return parse_manifest(j, path.parent_path(), required);
}

inline json to_json(const DatasetManifest &m) {
  json entries = json::array();
  for (const auto &e : m.entries) {
    json je = e.extra;
    je["id"] = e.id;
    for (const auto &[k, v] : e.paths)
      je[k] = v;
    entries.push_back(std::move(je));
  }
  return json{{"entries", std::move(entries)}};
}

inline void save_manifest(const fs::path &path, const DatasetManifest &m) {
  write_text_file(path, to_json(m).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/// Every tunable constant in one place. Loaded from JSON; command-line
/// flags override individual fields.
struct RunConfig {
  std::uint64_t seed = 0;
  double lambda = 0.5;
  double entropy_threshold = kDefaultEntropyThreshold;
  GlcmParams glcm;
  std::string occlusion_distribution;
  LossWeights loss_weights;
  CharbonnierParams charbonnier;
  std::size_t min_pixels = 16;
  bool align = true;

  void validate() const {
    detail::require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
    detail::require(std::isfinite(entropy_threshold), "entropy threshold must be finite");
    detail::require(glcm.levels >= 2 && glcm.levels <= 256, "GLCM levels must be in 2..256");
    detail::require(!glcm.offsets.empty(), "GLCM needs at least one offset");
    loss_weights.validate();
    charbonnier.validate();
  }
};

inline RunConfig parse_run_config(const json &j) {
  static const std::set<std::string> known{"seed",        "lambda",      "entropy_threshold", "glcm_levels",
                                           "glcm_offsets", "occlusion_distribution", "alpha_l", "alpha_p",
                                           "epsilon",     "alpha",       "min_pixels",        "align"};
  if (!j.is_object())
    throw InputError("run config must be a JSON object");
  for (const auto &[k, v] : j.items())
    if (!known.contains(k))
      throw InputError("run config: unknown key '" + k + "'");
  RunConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.lambda = j.value("lambda", c.lambda);
    c.entropy_threshold = j.value("entropy_threshold", c.entropy_threshold);
    c.glcm.levels = j.value("glcm_levels", c.glcm.levels);
    if (j.contains("glcm_offsets")) {
      c.glcm.offsets.clear();
      for (const auto &o : j.at("glcm_offsets"))
        c.glcm.offsets.push_back({o.at(0).get<int>(), o.at(1).get<int>()});
    }
    c.occlusion_distribution = j.value("occlusion_distribution", c.occlusion_distribution);
    c.loss_weights.alpha_l = j.value("alpha_l", c.loss_weights.alpha_l);
    c.loss_weights.alpha_p = j.value("alpha_p", c.loss_weights.alpha_p);
    c.charbonnier.epsilon = j.value("epsilon", c.charbonnier.epsilon);
    c.charbonnier.alpha = j.value("alpha", c.charbonnier.alpha);
    c.min_pixels = j.value("min_pixels", c.min_pixels);
    c.align = j.value("align", c.align);
  } catch (const json::exception &e) {
    throw InputError(std::string("run config: ") + e.what());
  }
  c.validate();
  return c;
}

inline RunConfig load_run_config(const fs::path &path) { return parse_run_config(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

/// Per-class pixel frequencies over all readable label maps plus per-entry
/// class areas. Unreadable maps are skipped with a diagnostic.
inline json corpus_stats(const DatasetManifest &manifest, const std::shared_ptr<const Palette> &palette) {
  std::map<int, std::uint64_t> totals;
  for (const auto &kv : palette->classes)
    totals[kv.second] = 0;
  std::uint64_t pixels = 0;
  json entries = json::array();
  json skipped = json::array();
  for (const auto &e : manifest.entries) {
    try {
      const LabelMap labels = load_label_map(manifest.path_of(e, "label_map"), palette);
      std::map<int, std::uint64_t> counts;
      for (auto v : labels.data())
        ++counts[v];
      json areas = json::object();
      for (const auto &[name, id] : palette->classes) {
        areas[name] = counts[id];
        totals[id] += counts[id];
      }
      pixels += labels.pixel_count();
      entries.push_back({{"id", e.id}, {"width", labels.width()}, {"height", labels.height()}, {"areas", areas}});
    } catch (const InputError &err) {
      skipped.push_back({{"id", e.id}, {"reason", err.what()}});
    }
  }
  json freq = json::object();
  for (const auto &[name, id] : palette->classes)
    freq[name] = pixels ? static_cast<double>(totals[id]) / static_cast<double>(pixels) : 0.0;
  return json{{"total_pixels", pixels}, {"class_frequency", freq}, {"entries", entries}, {"skipped", skipped}};
}

} // namespace occlumix
