#include "ctgraph/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "ctgraph/errors.hpp"

#include <nlohmann/json.hpp>

namespace ctgraph {

namespace {

std::uint16_t quantize16(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return std::uint16_t(std::lround(c * 65535.0));
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_pgm16(const ImageGrid& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << "P5\n" << img.width << " " << img.height << "\n65535\n";
  std::vector<unsigned char> row(std::size_t(img.width) * 2);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const std::uint16_t v = quantize16(img.at(r, c));
      row[2 * c] = (unsigned char)(v >> 8);  // big-endian per the format
      row[2 * c + 1] = (unsigned char)(v & 0xff);
    }
    f.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size()));
  }
  if (!f) throw IoError("write failed: " + path);
}

ImageGrid read_pgm16(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5") throw IoError("not a binary PGM: " + path);
  auto next_int = [&f, &path]() {
    int v;
    while (true) {
      f >> std::ws;
      if (f.peek() == '#') {
        std::string line;
        std::getline(f, line);
        continue;
      }
      if (!(f >> v)) throw IoError("malformed PGM header: " + path);
      return v;
    }
  };
  const int w = next_int(), h = next_int(), maxval = next_int();
  if (w <= 0 || h <= 0 || (maxval != 255 && maxval != 65535))
    throw IoError("unsupported PGM header: " + path);
  f.get();  // single whitespace after maxval
  ImageGrid img(h, w);
  const int bytes = maxval == 255 ? 1 : 2;
  std::vector<unsigned char> row(std::size_t(w) * bytes);
  for (int r = 0; r < h; ++r) {
    f.read(reinterpret_cast<char*>(row.data()), std::streamsize(row.size()));
    if (!f) throw IoError("truncated PGM payload: " + path);
    for (int c = 0; c < w; ++c) {
      const unsigned v = bytes == 1 ? row[c] : unsigned(row[2 * c]) << 8 | row[2 * c + 1];
      img.at(r, c) = double(v) / maxval;
    }
  }
  return img;
}

void write_png16(const ImageGrid& img, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("cannot open for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw IoError("png write failed: " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<unsigned char> row(std::size_t(img.width) * 2);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const std::uint16_t v = quantize16(img.at(r, c));
      row[2 * c] = (unsigned char)(v >> 8);  // PNG stores 16-bit big-endian
      row[2 * c + 1] = (unsigned char)(v & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

ImageGrid read_png16(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw IoError("cannot open: " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    std::fclose(fp);
    throw IoError("png read failed: " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY || (depth != 8 && depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw IoError("expected 8- or 16-bit grayscale PNG: " + path);
  }
  png_read_update_info(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  std::vector<unsigned char> row(stride);
  ImageGrid img{int(h), int(w)};
  const double maxval = depth == 8 ? 255.0 : 65535.0;
  for (png_uint_32 r = 0; r < h; ++r) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 c = 0; c < w; ++c) {
      const unsigned v = depth == 8 ? row[c] : unsigned(row[2 * c]) << 8 | row[2 * c + 1];
      img.at(int(r), int(c)) = double(v) / maxval;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}

void write_image(const ImageGrid& img, const std::string& path) {
  if (ends_with(path, ".png"))
    write_png16(img, path);
  else if (ends_with(path, ".pgm"))
    write_pgm16(img, path);
  else
    throw IoError("unsupported image extension (use .pgm or .png): " + path);
}

ImageGrid read_image(const std::string& path) {
  if (ends_with(path, ".png")) return read_png16(path);
  if (ends_with(path, ".pgm")) return read_pgm16(path);
  throw IoError("unsupported image extension (use .pgm or .png): " + path);
}

void write_sinogram(const Sinogram& s, const std::string& path) {
  {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    static_assert(sizeof(double) == 8);
    f.write(reinterpret_cast<const char*>(s.values.data()),
            std::streamsize(sizeof(double)) * s.values.size());
    if (!f) throw IoError("write failed: " + path);
  }
  nlohmann::json g;
  g["mode"] = s.geometry.mode == BeamMode::fan ? "fan" : "parallel";
  g["image_side"] = s.geometry.image_side;
  g["n_angles"] = s.geometry.n_angles;
  g["angles_deg"] = s.geometry.angles_deg;
  g["n_detector"] = s.geometry.n_detector;
  g["source_radius"] = s.geometry.source_radius;
  g["detector_radius"] = s.geometry.detector_radius;
  g["detector_spacing"] = s.geometry.detector_spacing;
  nlohmann::json j;
  j["geometry"] = g;
  j["noise_level"] = s.noise_level;
  j["noise_norm"] = s.noise_norm;
  j["m"] = s.values.size();
  write_text_file(path + ".json", j.dump(2) + "\n");
}

Sinogram read_sinogram(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path + ".json"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed sinogram sidecar for " + path + ": " + e.what());
  }
  Sinogram s;
  try {
    const auto& g = j.at("geometry");
    s.geometry.mode = g.at("mode").get<std::string>() == "fan" ? BeamMode::fan : BeamMode::parallel;
    s.geometry.image_side = g.at("image_side").get<int>();
    s.geometry.n_angles = g.at("n_angles").get<int>();
    s.geometry.angles_deg = g.at("angles_deg").get<std::vector<double>>();
    s.geometry.n_detector = g.at("n_detector").get<int>();
    s.geometry.source_radius = g.at("source_radius").get<double>();
    s.geometry.detector_radius = g.at("detector_radius").get<double>();
    s.geometry.detector_spacing = g.at("detector_spacing").get<double>();
    s.noise_level = j.at("noise_level").get<double>();
    s.noise_norm = j.at("noise_norm").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("incomplete sinogram sidecar for " + path + ": " + e.what());
  }
  const Eigen::Index m = j.at("m").get<Eigen::Index>();

  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  s.values.resize(m);
  f.read(reinterpret_cast<char*>(s.values.data()), std::streamsize(sizeof(double)) * m);
  if (!f || f.gcount() != std::streamsize(sizeof(double)) * m)
    throw IoError("truncated sinogram payload: " + path);
  return s;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(content.data(), std::streamsize(content.size()));
  if (!f) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace ctgraph
