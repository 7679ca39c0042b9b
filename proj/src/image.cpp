#include "cftrack/image.hpp"

#include <cctype>
#include <fstream>
#include <string>

#include "cftrack/error.hpp"

namespace cftrack {

Image::Image(int width, int height, std::uint8_t fill)
    : width_(width), height_(height), bytes_(static_cast<std::size_t>(width) * height * 3, fill) {}

void write_ppm(const Image& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.bytes().data()), static_cast<std::streamsize>(image.bytes().size()));
  if (!out) throw IoError("short write to " + path.string());
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(c);
  }
  return token;
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  if (next_token(in) != "P6") throw ParseError(path.string() + ": not a binary PPM (P6)");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token(in));
    height = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw ParseError(path.string() + ": malformed PPM header");
  }
  if (width <= 0 || height <= 0 || maxval != 255) throw ParseError(path.string() + ": unsupported PPM header");
  Image image(width, height);
  in.read(reinterpret_cast<char*>(image.bytes().data()), static_cast<std::streamsize>(image.bytes().size()));
  if (in.gcount() != static_cast<std::streamsize>(image.bytes().size())) {
    throw ParseError(path.string() + ": truncated pixel data");
  }
  return image;
}

}  // namespace cftrack
