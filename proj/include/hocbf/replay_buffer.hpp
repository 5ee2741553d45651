#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

namespace hocbf {

/// Fixed-capacity FIFO store. Once full, each push overwrites the oldest entry.
template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer capacity must be positive");
    data_.reserve(capacity);
  }

  void push(T item) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(item));
    } else {
      data_[next_] = std::move(item);
    }
    next_ = (next_ + 1) % capacity_;
  }

  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  /// Element i in insertion order, 0 being the oldest retained entry.
  [[nodiscard]] const T& operator[](std::size_t i) const {
    if (data_.size() < capacity_) return data_[i];
    return data_[(next_ + i) % capacity_];
  }

  /// `count` indices drawn uniformly with replacement from the current contents.
  template <typename Rng>
  [[nodiscard]] std::vector<std::size_t> sample_indices(std::size_t count, Rng& rng) const {
    if (data_.empty()) throw std::logic_error("ReplayBuffer::sample_indices on empty buffer");
    std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
    std::vector<std::size_t> idx(count);
    for (auto& i : idx) i = pick(rng);
    return idx;
  }

  template <typename Rng>
  [[nodiscard]] std::vector<T> sample(std::size_t count, Rng& rng) const {
    std::vector<T> out;
    out.reserve(count);
    for (std::size_t i : sample_indices(count, rng)) out.push_back((*this)[i]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<T> data_;
};

}  // namespace hocbf
