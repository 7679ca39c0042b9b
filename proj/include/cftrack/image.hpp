#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cftrack {

// 8-bit interleaved RGB image.
class Image {
 public:
  Image() = default;
  Image(int width, int height, std::uint8_t fill = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  std::uint8_t* pixel(int x, int y) { return bytes_.data() + (static_cast<std::size_t>(y) * width_ + x) * 3; }
  const std::uint8_t* pixel(int x, int y) const {
    return bytes_.data() + (static_cast<std::size_t>(y) * width_ + x) * 3;
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bytes_;
};

// Binary PPM (P6, maxval 255).
void write_ppm(const Image& image, const std::filesystem::path& path);
Image read_ppm(const std::filesystem::path& path);

}  // namespace cftrack
