#include "scaleopt/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "scaleopt/errors.hpp"

namespace scaleopt {

namespace {

constexpr double kScale16 = 255.0 / 65535.0;

int next_pnm_token(std::istream& in, std::string& tok) {
  tok.clear();
  char c;
  while (in.get(c)) {
    if (c == '#') {  // comment to end of line
      while (in.get(c) && c != '\n') {
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return 1;
      continue;
    }
    tok.push_back(c);
  }
  return tok.empty() ? 0 : 1;
}

long parse_pnm_int(std::istream& in, const std::string& path, const char* what) {
  std::string tok;
  if (!next_pnm_token(in, tok)) throw ParseError(path, std::string("missing ") + what);
  try {
    std::size_t pos = 0;
    const long v = std::stol(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(path, std::string("malformed ") + what + " '" + tok + "'");
  }
}

GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open file");
  std::string magic;
  if (!next_pnm_token(in, magic) || (magic != "P5" && magic != "P2"))
    throw ParseError(path, "not a PGM file (expected P5 or P2)");
  const long w = parse_pnm_int(in, path, "width");
  const long h = parse_pnm_int(in, path, "height");
  const long maxval = parse_pnm_int(in, path, "maxval");
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw ParseError(path, "invalid PGM header");

  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  const std::size_t n = img.data.size();
  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      const long v = parse_pnm_int(in, path, "sample");
      if (v < 0 || v > maxval) throw ParseError(path, "sample out of range");
      img.data[i] = maxval > 255 ? v * kScale16 : double(v);
    }
    return img;
  }
  if (maxval > 255) {
    std::vector<unsigned char> buf(n * 2);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw ParseError(path, "truncated pixel data");
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned v = (unsigned(buf[2 * i]) << 8) | unsigned(buf[2 * i + 1]);
      img.data[i] = v * kScale16;
    }
  } else {
    std::vector<unsigned char> buf(n);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw ParseError(path, "truncated pixel data");
    for (std::size_t i = 0; i < n; ++i) img.data[i] = double(buf[i]);
  }
  return img;
}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

GrayImage load_png(const std::string& path) {
  PngReader r;
  r.fp = std::fopen(path.c_str(), "rb");
  if (!r.fp) throw ParseError(path, "cannot open file");
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) throw ParseError(path, "libpng init failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw ParseError(path, "libpng init failed");
  if (setjmp(png_jmpbuf(r.png))) throw ParseError(path, "corrupt PNG data");

  png_init_io(r.png, r.fp);
  png_read_info(r.png, r.info);

  const png_byte color = png_get_color_type(r.png, r.info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(r.png, r.info) < 8)
    png_set_expand_gray_1_2_4_to_8(r.png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(r.png, 1 /* silent */, 29900, 58700);
  if (png_get_bit_depth(r.png, r.info) == 16) png_set_swap(r.png);  // to host LE
  png_set_interlace_handling(r.png);
  png_read_update_info(r.png, r.info);

  const png_uint_32 w = png_get_image_width(r.png, r.info);
  const png_uint_32 h = png_get_image_height(r.png, r.info);
  const int depth = png_get_bit_depth(r.png, r.info);
  if (w == 0 || h == 0) throw ParseError(path, "empty PNG");

  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  const std::size_t stride = static_cast<std::size_t>(w) * (depth == 16 ? 2 : 1);
  std::vector<unsigned char> rowbuf(stride);
  for (png_uint_32 v = 0; v < h; ++v) {
    png_read_row(r.png, rowbuf.data(), nullptr);
    if (depth == 16) {
      const auto* row16 = reinterpret_cast<const unsigned short*>(rowbuf.data());
      for (png_uint_32 u = 0; u < w; ++u)
        img.at(static_cast<int>(u), static_cast<int>(v)) = row16[u] * kScale16;
    } else {
      for (png_uint_32 u = 0; u < w; ++u)
        img.at(static_cast<int>(u), static_cast<int>(v)) = double(rowbuf[u]);
    }
  }
  png_read_end(r.png, nullptr);
  return img;
}

}  // namespace

GrayImage load_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw ParseError(path, "cannot open file");
  unsigned char magic[8] = {};
  probe.read(reinterpret_cast<char*>(magic), 8);
  probe.close();
  static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (std::memcmp(magic, png_sig, 8) == 0) return load_png(path);
  if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '2')) return load_pgm(path);
  throw ParseError(path, "unsupported image format (expected PGM or PNG)");
}

void save_pgm(const GrayImage& img, const std::string& path, int max_value) {
  if (max_value != 255 && max_value != 65535)
    throw ConfigError("save_pgm: max_value must be 255 or 65535");
  if (img.empty()) throw ConfigError("save_pgm: empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path, "cannot open file for writing");
  out << "P5\n" << img.width << " " << img.height << "\n" << max_value << "\n";
  const double gain = max_value / 255.0;
  if (max_value > 255) {
    std::vector<unsigned char> buf(img.data.size() * 2);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      double v = std::lround(double(img.data[i]) * gain);
      v = std::min(std::max(v, 0.0), double(max_value));
      const auto q = static_cast<unsigned>(v);
      buf[2 * i] = static_cast<unsigned char>(q >> 8);
      buf[2 * i + 1] = static_cast<unsigned char>(q & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  } else {
    std::vector<unsigned char> buf(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      double v = std::lround(double(img.data[i]));
      buf[i] = static_cast<unsigned char>(std::min(std::max(v, 0.0), 255.0));
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw ParseError(path, "write failed");
}

void save_raw_float(const std::vector<float>& values, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path, "cannot open file for writing");
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!out) throw ParseError(path, "write failed");
}

std::vector<float> load_raw_float(const std::string& path, std::size_t expected_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open file");
  std::vector<float> values(expected_count);
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(expected_count * sizeof(float))))
    throw ParseError(path, "truncated float buffer");
  return values;
}

}  // namespace scaleopt
