#include "minipic/layout.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <new>

namespace minipic {

namespace {
std::atomic<std::uint64_t> g_copy_count{0};
}  // namespace

std::uint64_t copy_count() { return g_copy_count.load(); }
void reset_copy_count() { g_copy_count.store(0); }

const char* to_string(Layout l) {
  return l == Layout::record_major ? "record_major" : "field_major";
}

const char* to_string(ScatterBackend b) {
  switch (b) {
    case ScatterBackend::replicated: return "replicated";
    case ScatterBackend::shared_update: return "shared_update";
    case ScatterBackend::sequential: return "sequential";
  }
  return "?";
}

std::size_t linear_offset(std::size_t record, std::size_t field,
                          std::size_t num_records, std::size_t num_fields,
                          Layout policy) {
  if (record >= num_records || field >= num_fields) {
    throw usage_error("linear_offset: index (" + std::to_string(record) + ", " +
                      std::to_string(field) + ") out of range for " +
                      std::to_string(num_records) + "x" +
                      std::to_string(num_fields));
  }
  return linear_offset_unchecked(record, field, num_records, num_fields,
                                 policy);
}

struct FieldedBuffer::Block {
  explicit Block(std::size_t n) : count(n) {
    const std::size_t bytes = (n * sizeof(real_t) + 63) / 64 * 64;
    ptr = static_cast<real_t*>(std::aligned_alloc(64, bytes));
    if (!ptr) throw std::bad_alloc();
    std::memset(ptr, 0, bytes);
  }
  ~Block() { std::free(ptr); }
  Block(const Block&) = delete;
  Block& operator=(const Block&) = delete;

  real_t* ptr = nullptr;
  std::size_t count = 0;
};

FieldedBuffer::FieldedBuffer(std::size_t num_records, std::size_t num_fields,
                             Layout policy, SpaceTag space)
    : block_(std::make_shared<Block>(num_records * num_fields)),
      data_(block_->ptr),
      num_records_(num_records),
      num_fields_(num_fields),
      policy_(policy),
      space_(std::move(space)) {}

real_t& FieldedBuffer::at(std::size_t record, std::size_t field) {
  return data_[linear_offset(record, field, num_records_, num_fields_,
                             policy_)];
}

real_t FieldedBuffer::at(std::size_t record, std::size_t field) const {
  return data_[linear_offset(record, field, num_records_, num_fields_,
                             policy_)];
}

void FieldedBuffer::fill(real_t value) {
  for (std::size_t i = 0; i < size(); ++i) data_[i] = value;
}

FieldedBuffer::FieldedBuffer(std::shared_ptr<Block> block,
                             std::size_t num_records, std::size_t num_fields,
                             Layout policy, SpaceTag space)
    : block_(std::move(block)),
      data_(block_->ptr),
      num_records_(num_records),
      num_fields_(num_fields),
      policy_(policy),
      space_(std::move(space)) {}

FieldedBuffer FieldedBuffer::mirror(SpaceTag target) const {
  if (target.same_space(space_)) {
    return FieldedBuffer(block_, num_records_, num_fields_, policy_,
                         std::move(target));
  }
  return FieldedBuffer(num_records_, num_fields_, policy_, std::move(target));
}

void copy_between(const FieldedBuffer& src, FieldedBuffer& dst) {
  if (src.num_records() != dst.num_records() ||
      src.num_fields() != dst.num_fields()) {
    throw usage_error("copy_between: shape mismatch (" +
                      std::to_string(src.num_records()) + "x" +
                      std::to_string(src.num_fields()) + " vs " +
                      std::to_string(dst.num_records()) + "x" +
                      std::to_string(dst.num_fields()) + ")");
  }
  if (src.aliases(dst)) return;  // same allocation: nothing to move
  if (src.policy() == dst.policy()) {
    std::memcpy(dst.data(), src.data(), src.size() * sizeof(real_t));
  } else {
    const std::size_t n = src.num_records();
    const std::size_t f = src.num_fields();
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < f; ++c) dst(r, c) = src(r, c);
  }
  g_copy_count.fetch_add(1, std::memory_order_relaxed);
}

ScatterBuffer::ScatterBuffer(std::size_t num_slots, std::size_t num_lanes,
                             ScatterBackend backend, int worker_count)
    : num_slots_(num_slots),
      num_lanes_(num_lanes),
      backend_(backend),
      worker_count_(worker_count < 1 ? 1 : worker_count) {
  const std::size_t cells = num_slots_ * num_lanes_;
  const std::size_t pad = 64 / sizeof(real_t);
  copy_stride_ = (cells + pad - 1) / pad * pad;
  const int copies =
      backend_ == ScatterBackend::replicated ? worker_count_ : 1;
  data_.assign(copy_stride_ * static_cast<std::size_t>(copies), real_t(0));
}

void ScatterBuffer::contribute(int worker, std::size_t slot, std::size_t lane,
                               real_t value) {
  if (worker < 0 || worker >= worker_count_ || slot >= num_slots_ ||
      lane >= num_lanes_) {
    throw usage_error("scatter_contribute: index out of range (worker " +
                      std::to_string(worker) + ", slot " +
                      std::to_string(slot) + ", lane " + std::to_string(lane) +
                      ")");
  }
  const std::size_t cell = slot * num_lanes_ + lane;
  switch (backend_) {
    case ScatterBackend::replicated:
      copy_of(worker)[cell] += value;
      break;
    case ScatterBackend::shared_update: {
      std::atomic_ref<real_t> ref(data_[cell]);
      ref.fetch_add(value, std::memory_order_relaxed);
      break;
    }
    case ScatterBackend::sequential:
      data_[cell] += value;
      break;
  }
}

void ScatterBuffer::contribute_row(int worker, std::size_t slot,
                                   const real_t* values) {
  real_t* row;
  switch (backend_) {
    case ScatterBackend::replicated:
      row = copy_of(worker) + slot * num_lanes_;
      for (std::size_t l = 0; l < num_lanes_; ++l) row[l] += values[l];
      break;
    case ScatterBackend::shared_update:
      row = data_.data() + slot * num_lanes_;
      for (std::size_t l = 0; l < num_lanes_; ++l) {
        std::atomic_ref<real_t> ref(row[l]);
        ref.fetch_add(values[l], std::memory_order_relaxed);
      }
      break;
    case ScatterBackend::sequential:
      row = data_.data() + slot * num_lanes_;
      for (std::size_t l = 0; l < num_lanes_; ++l) row[l] += values[l];
      break;
  }
}

void ScatterBuffer::reduce(std::span<real_t> dense) const {
  const std::size_t cells = num_slots_ * num_lanes_;
  if (dense.size() != cells) {
    throw usage_error("scatter_reduce: dense size " +
                      std::to_string(dense.size()) + " != " +
                      std::to_string(cells));
  }
  if (backend_ == ScatterBackend::replicated) {
    std::memcpy(dense.data(), copy_of(0), cells * sizeof(real_t));
    for (int w = 1; w < worker_count_; ++w) {
      const real_t* copy = copy_of(w);
      for (std::size_t i = 0; i < cells; ++i) dense[i] += copy[i];
    }
  } else {
    std::memcpy(dense.data(), data_.data(), cells * sizeof(real_t));
  }
}

std::vector<real_t> ScatterBuffer::reduce() const {
  std::vector<real_t> dense(num_slots_ * num_lanes_);
  reduce(dense);
  return dense;
}

void ScatterBuffer::clear() {
  std::memset(data_.data(), 0, data_.size() * sizeof(real_t));
}

}  // namespace minipic
