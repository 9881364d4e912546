#pragma once

#include <cstddef>
#include <vector>

namespace sapit {

// Fixed-capacity scratch buffer that lives on the stack for small sizes and
// falls back to the heap otherwise. Used inside hot per-slot loops where a
// std::vector allocation per call would dominate the runtime.
template <typename T, std::size_t Cap>
class SmallBuf {
 public:
    explicit SmallBuf(std::size_t n)
        : ptr_(n <= Cap ? stack_ : (heap_.resize(n), heap_.data())) {}
    T* data() { return ptr_; }
    const T* data() const { return ptr_; }
    T& operator[](std::size_t i) { return ptr_[i]; }
    const T& operator[](std::size_t i) const { return ptr_[i]; }

 private:
    T stack_[Cap];
    std::vector<T> heap_;
    T* ptr_;
};

}  // namespace sapit
