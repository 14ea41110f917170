#pragma once

#include <Eigen/Dense>

#include <string>

#include "ctgraph/geometry.hpp"
#include "ctgraph/image.hpp"

namespace ctgraph {

// 16-bit grayscale images; values map linearly between [0,1] and [0,65535].
void write_pgm16(const ImageGrid& img, const std::string& path);
ImageGrid read_pgm16(const std::string& path);
void write_png16(const ImageGrid& img, const std::string& path);
ImageGrid read_png16(const std::string& path);  // accepts 8- or 16-bit grayscale

// Dispatch on extension (.pgm / .png).
void write_image(const ImageGrid& img, const std::string& path);
ImageGrid read_image(const std::string& path);

// Sinogram: flat little-endian float64 payload plus a JSON sidecar
// (same path with ".json" appended) carrying the geometry and noise metadata.
void write_sinogram(const Sinogram& s, const std::string& path);
Sinogram read_sinogram(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Full-precision decimal formatting (round-trips doubles).
std::string format_double(double v);

}  // namespace ctgraph
