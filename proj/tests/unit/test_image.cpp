#include <doctest.h>

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <scaleopt/image.hpp>
#include <scaleopt/image_io.hpp>

using namespace scaleopt;
namespace fs = std::filesystem;

namespace {

CameraIntrinsics image_K(int w, int h) {
  CameraIntrinsics K;
  K.fx = 100;
  K.fy = 100;
  K.cx = w / 2.0 - 0.5;
  K.cy = h / 2.0 - 0.5;
  K.width = w;
  K.height = h;
  return K;
}

GrayImage ramp_image(int w, int h, double a, double b, double c) {
  GrayImage img(w, h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) img.at(u, v) = a * u + b * v + c;
  return img;
}

fs::path temp_file(const char* name) {
  return fs::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("build_pyramid dimensions and constants") {
  SUBCASE("constant image stays constant on every level") {
    const GrayImage img(64, 64, 7.0);
    const auto pyr = build_pyramid(img, image_K(64, 64), 4);
    REQUIRE(pyr.num_levels() == 4);
    for (int l = 0; l < 4; ++l)
      for (double v : pyr.level(l).data) CHECK(v == 7.0);
  }
  SUBCASE("64x48 halves to 8x6") {
    const auto pyr = build_pyramid(GrayImage(64, 48), image_K(64, 48), 4);
    const int wants[4][2] = {{64, 48}, {32, 24}, {16, 12}, {8, 6}};
    for (int l = 0; l < 4; ++l) {
      CHECK(pyr.level(l).width == wants[l][0]);
      CHECK(pyr.level(l).height == wants[l][1]);
    }
  }
  SUBCASE("odd trailing column is dropped") {
    const auto pyr = build_pyramid(GrayImage(65, 49), image_K(65, 49), 2);
    CHECK(pyr.level(1).width == 32);
    CHECK(pyr.level(1).height == 24);
  }
  SUBCASE("period-2 checkerboard averages to the mean tone") {
    GrayImage img(32, 32);
    for (int v = 0; v < 32; ++v)
      for (int u = 0; u < 32; ++u) img.at(u, v) = ((u + v) & 1) ? 200.0 : 100.0;
    const auto pyr = build_pyramid(img, image_K(32, 32), 2);
    for (double v : pyr.level(1).data) CHECK(v == 150.0);
  }
  SUBCASE("too small for the requested levels") {
    CHECK_THROWS_AS(build_pyramid(GrayImage(4, 64), image_K(4, 64), 4), ConfigError);
  }
}

TEST_CASE("pyramid construction is idempotent across levels") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.0, 255.0);
  GrayImage img(64, 48);
  for (auto& v : img.data) v = uni(rng);
  const auto pyr = build_pyramid(img, image_K(64, 48), 4);
  for (int l = 1; l < 4; ++l) {
    const auto sub = build_pyramid(pyr.level(l), pyr.K(l), 4 - l);
    CHECK(sub.level(0).data == pyr.level(l).data);
    // And one further level agrees with the original chain.
    if (l < 3) {
      const auto deeper = build_pyramid(pyr.level(l), pyr.K(l), 2);
      CHECK(deeper.level(1).data == pyr.level(l + 1).data);
    }
  }
}

TEST_CASE("sample_bilinear") {
  SUBCASE("integer coordinates return the exact pixel") {
    GrayImage img(8, 8);
    for (int v = 0; v < 8; ++v)
      for (int u = 0; u < 8; ++u) img.at(u, v) = 10.0 * v + u;
    for (int v = 0; v < 8; ++v)
      for (int u = 0; u < 8; ++u) CHECK(*sample_bilinear(img, {double(u), double(v)}) == img.at(u, v));
  }
  SUBCASE("center of a 2x2 block") {
    GrayImage img(2, 2);
    img.at(0, 0) = 0;
    img.at(1, 0) = 0;
    img.at(0, 1) = 10;
    img.at(1, 1) = 10;
    CHECK(*sample_bilinear(img, {0.5, 0.5}) == 5.0);
  }
  SUBCASE("ramp 3u + 2v") {
    const auto img = ramp_image(16, 16, 3, 2, 0);
    CHECK(*sample_bilinear(img, {1.25, 2.75}) == doctest::Approx(9.25).epsilon(1e-15));
  }
  SUBCASE("reproduces random affine images to 1e-9") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uab(-0.5, 0.5), uc(50, 200), up(0.0, 15.0);
    for (int trial = 0; trial < 20; ++trial) {
      const double a = uab(rng), b = uab(rng), c = uc(rng);
      const auto img = ramp_image(16, 16, a, b, c);
      for (int i = 0; i < 50; ++i) {
        const Pixel p(up(rng), up(rng));
        CHECK(*sample_bilinear(img, p) ==
              doctest::Approx(a * p.x() + b * p.y() + c).epsilon(1e-12));
      }
    }
  }
  SUBCASE("out of bounds is a signal") {
    GrayImage img(4, 4, 1.0);
    CHECK_FALSE(sample_bilinear(img, {-0.01, 0}).has_value());
    CHECK_FALSE(sample_bilinear(img, {3.01, 1}).has_value());
    CHECK(sample_bilinear(img, {3.0, 3.0}).has_value());
    CHECK_FALSE(sample_bilinear(img, {std::nan(""), 1}).has_value());
  }
}

TEST_CASE("gradient_bilinear") {
  SUBCASE("linear ramp has constant gradient") {
    const auto img = ramp_image(16, 16, 3, 2, 5);
    for (double u = 1.0; u <= 14.0; u += 0.7)
      for (double v = 1.0; v <= 14.0; v += 0.9) {
        const auto g = gradient_bilinear(img, {u, v});
        REQUIRE(g.has_value());
        CHECK(g->x() == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(g->y() == doctest::Approx(2.0).epsilon(1e-12));
      }
  }
  SUBCASE("constant image has zero gradient") {
    const GrayImage img(8, 8, 42.0);
    CHECK(gradient_bilinear(img, {3.5, 4.5})->norm() == 0.0);
  }
  SUBCASE("central difference is exact for quadratics") {
    GrayImage img(16, 4);
    for (int v = 0; v < 4; ++v)
      for (int u = 0; u < 16; ++u) img.at(u, v) = double(u) * u;
    CHECK(gradient_bilinear(img, {5.0, 2.0})->x() == 10.0);
  }
  SUBCASE("needs a 1 px margin") {
    const GrayImage img(8, 8, 1.0);
    CHECK_FALSE(gradient_bilinear(img, {0.5, 4.0}).has_value());
    CHECK_FALSE(gradient_bilinear(img, {6.5, 4.0}).has_value());
    CHECK(gradient_bilinear(img, {6.0, 6.0}).has_value());
    CHECK(in_interior(img, {6.0, 6.0}));
    CHECK_FALSE(in_interior(img, {6.1, 6.0}));
  }
}

TEST_CASE("PGM round trips") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uni(0.0, 255.0);
  GrayImage img(31, 17);
  for (auto& v : img.data) v = uni(rng);

  SUBCASE("16-bit keeps 1/514 precision") {
    const auto path = temp_file("scaleopt_16.pgm");
    save_pgm(img, path.string(), 65535);
    const GrayImage back = load_image(path.string());
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i)
      CHECK(std::abs(back.data[i] - img.data[i]) < 0.5 / 257.0 + 1e-9);
  }
  SUBCASE("8-bit rounds to integers") {
    const auto path = temp_file("scaleopt_8.pgm");
    save_pgm(img, path.string(), 255);
    const GrayImage back = load_image(path.string());
    for (std::size_t i = 0; i < img.data.size(); ++i)
      CHECK(std::abs(back.data[i] - img.data[i]) <= 0.5);
  }
  SUBCASE("ascii P2 reads back") {
    const auto path = temp_file("scaleopt_p2.pgm");
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    std::fprintf(f, "P2\n# comment\n3 2\n255\n0 10 20\n30 40 255\n");
    std::fclose(f);
    const GrayImage back = load_image(path.string());
    CHECK(back.at(2, 1) == 255.0);
    CHECK(back.at(1, 0) == 10.0);
  }
  SUBCASE("malformed input is rejected") {
    const auto path = temp_file("scaleopt_bad.pgm");
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    std::fprintf(f, "P5\n4 4\n255\nxx");  // truncated payload
    std::fclose(f);
    CHECK_THROWS_AS(load_image(path.string()), ParseError);
    CHECK_THROWS_AS(load_image("/nonexistent/no.pgm"), ParseError);
  }
}

namespace {

// Minimal libpng writer for fixture files.
void write_png(const fs::path& path, int w, int h, int bit_depth, int color_type,
               const std::vector<unsigned char>& bytes) {
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  REQUIRE(fp != nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  REQUIRE(setjmp(png_jmpbuf(png)) == 0);
  png_init_io(png, fp);
  png_set_IHDR(png, info, w, h, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t stride = std::size_t(w) * channels * (bit_depth / 8);
  for (int y = 0; y < h; ++y)
    png_write_row(png, const_cast<png_bytep>(bytes.data() + y * stride));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace

TEST_CASE("PNG loading") {
  SUBCASE("8-bit grayscale") {
    const auto path = temp_file("scaleopt_gray8.png");
    std::vector<unsigned char> bytes = {0, 50, 100, 150, 200, 250};
    write_png(path, 3, 2, 8, PNG_COLOR_TYPE_GRAY, bytes);
    const GrayImage img = load_image(path.string());
    REQUIRE(img.width == 3);
    REQUIRE(img.height == 2);
    CHECK(img.at(1, 0) == 50.0);
    CHECK(img.at(2, 1) == 250.0);
  }
  SUBCASE("16-bit grayscale rescales to [0, 255]") {
    const auto path = temp_file("scaleopt_gray16.png");
    std::vector<unsigned char> bytes;
    for (unsigned v : {0u, 257u, 65535u, 32896u}) {  // big-endian samples
      bytes.push_back(static_cast<unsigned char>(v >> 8));
      bytes.push_back(static_cast<unsigned char>(v & 0xff));
    }
    write_png(path, 2, 2, 16, PNG_COLOR_TYPE_GRAY, bytes);
    const GrayImage img = load_image(path.string());
    CHECK(img.at(0, 0) == 0.0);
    CHECK(img.at(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(img.at(0, 1) == doctest::Approx(255.0).epsilon(1e-12));
    CHECK(img.at(1, 1) == doctest::Approx(32896.0 * 255.0 / 65535.0).epsilon(1e-12));
  }
  SUBCASE("color converts by luminance") {
    const auto path = temp_file("scaleopt_rgb.png");
    // one pure-red, one pure-green, one pure-blue, one white pixel
    std::vector<unsigned char> bytes = {255, 0, 0, 0, 255, 0, 0, 0, 255, 255, 255, 255};
    write_png(path, 4, 1, 8, PNG_COLOR_TYPE_RGB, bytes);
    const GrayImage img = load_image(path.string());
    CHECK(img.at(0, 0) == doctest::Approx(0.299 * 255).epsilon(0.01));
    CHECK(img.at(1, 0) == doctest::Approx(0.587 * 255).epsilon(0.01));
    CHECK(img.at(2, 0) == doctest::Approx(0.114 * 255).epsilon(0.01));
    CHECK(img.at(3, 0) == doctest::Approx(255.0).epsilon(0.01));
  }
}

TEST_CASE("raw float buffers") {
  const std::vector<float> values = {1.5f, -2.25f, 3.75f, 0.0f};
  const auto path = temp_file("scaleopt_depth.raw");
  save_raw_float(values, path.string());
  CHECK(load_raw_float(path.string(), 4) == values);
  CHECK_THROWS_AS(load_raw_float(path.string(), 5), ParseError);
}
