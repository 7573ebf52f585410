#pragma once

// Thin RAII layer over FFTW. Plan creation is serialized; execution on
// plan-private buffers is thread-safe.

#include <fftw3.h>

#include <algorithm>
#include <cstddef>
#include <new>
#include <mutex>

namespace lfpp::detail {

std::mutex& fftw_planner_mutex();

// FFTW-aligned buffer; alignment is fixed so identical inputs always hit
// the same codelets and produce bitwise-identical outputs.
template <typename T>
class FftwBuffer {
 public:
  explicit FftwBuffer(std::size_t n) : n_(n), data_(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {
    if (data_ == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data_); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  T* data() { return data_; }
  const T* data() const { return data_; }
  std::size_t size() const { return n_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

 private:
  std::size_t n_;
  T* data_;
};

class FftwPlan {
 public:
  explicit FftwPlan(fftw_plan p) : plan_(p) {}
  ~FftwPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;

  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

// Smallest integer >= n whose prime factors are all <= 7.
int next_smooth_size(int n);

}  // namespace lfpp::detail
