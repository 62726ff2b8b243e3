#include "testing.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include <unistd.h>

namespace testing {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    path_ = base / ("valuelens-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    if (std::filesystem::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

FakeServer::FakeServer(const std::function<void(httplib::Server&)>& setup) {
  setup(server_);
  port_ = server_.bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("fake server could not bind");
  thread_ = std::thread([this] { server_.listen_after_bind(); });
  server_.wait_until_ready();
}

FakeServer::~FakeServer() {
  server_.stop();
  if (thread_.joinable()) thread_.join();
}

std::vector<double> gauss_jordan(std::vector<long double> a, std::vector<long double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
    }
    if (std::fabs(a[pivot * n + col]) < 1e-300L) throw std::runtime_error("singular system");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    const long double d = a[col * n + col];
    for (std::size_t c = 0; c < n; ++c) a[col * n + c] /= d;
    b[col] /= d;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const long double f = a[r * n + col];
      if (f == 0.0L) continue;
      for (std::size_t c = 0; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  return std::vector<double>(b.begin(), b.end());
}

std::vector<double> normal_equations(const std::vector<double>& x, std::size_t cols,
                                     const std::vector<double>& y) {
  const std::size_t rows = y.size();
  std::vector<long double> xtx(cols * cols, 0.0L), xty(cols, 0.0L);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < cols; ++i) {
      xty[i] += static_cast<long double>(x[r * cols + i]) * y[r];
      for (std::size_t j = 0; j < cols; ++j) {
        xtx[i * cols + j] += static_cast<long double>(x[r * cols + i]) * x[r * cols + j];
      }
    }
  }
  return gauss_jordan(std::move(xtx), std::move(xty));
}

}  // namespace testing
