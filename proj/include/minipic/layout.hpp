#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "minipic/types.hpp"

namespace minipic {

/// Storage order for a multi-field record buffer.
///
/// record_major keeps all fields of one record contiguous (array-of-structs);
/// field_major keeps all records of one field contiguous (struct-of-arrays).
enum class Layout { record_major, field_major };

const char* to_string(Layout l);

/// Flat storage offset of (record, field) under the given policy.
constexpr std::size_t linear_offset_unchecked(std::size_t record,
                                              std::size_t field,
                                              std::size_t num_records,
                                              std::size_t num_fields,
                                              Layout policy) {
  return policy == Layout::record_major ? record * num_fields + field
                                        : field * num_records + record;
}

/// Bounds-checked variant; throws usage_error on an out-of-range index.
std::size_t linear_offset(std::size_t record, std::size_t field,
                          std::size_t num_records, std::size_t num_fields,
                          Layout policy);

/// Label naming a memory space. This build is single-node, so all spaces
/// share physical memory; the label decides whether mirrors alias.
struct SpaceTag {
  std::string label = "device";
  bool same_space(const SpaceTag& other) const { return label == other.label; }
};

/// Process-wide count of materialized buffer copies. Same-allocation copies
/// are no-ops and leave the counter untouched.
std::uint64_t copy_count();
void reset_copy_count();

/// Layout-polymorphic 2D buffer of reals: num_records x num_fields, with the
/// policy fixed at creation. Storage is 64-byte aligned and zero-initialized.
///
/// Buffers are movable but not copyable; mirror() produces a second handle,
/// which aliases the same allocation when the target space matches (so
/// copy_between on the pair degenerates to a no-op, mimicking a host mirror
/// on hardware where host and device memory coincide).
class FieldedBuffer {
public:
  FieldedBuffer(std::size_t num_records, std::size_t num_fields, Layout policy,
                SpaceTag space = {});

  FieldedBuffer(FieldedBuffer&&) noexcept = default;
  FieldedBuffer& operator=(FieldedBuffer&&) noexcept = default;
  FieldedBuffer(const FieldedBuffer&) = delete;
  FieldedBuffer& operator=(const FieldedBuffer&) = delete;

  std::size_t num_records() const { return num_records_; }
  std::size_t num_fields() const { return num_fields_; }
  Layout policy() const { return policy_; }
  const SpaceTag& space() const { return space_; }

  real_t* data() { return data_; }
  const real_t* data() const { return data_; }
  std::size_t size() const { return num_records_ * num_fields_; }

  real_t& operator()(std::size_t record, std::size_t field) {
    return data_[linear_offset_unchecked(record, field, num_records_,
                                         num_fields_, policy_)];
  }
  real_t operator()(std::size_t record, std::size_t field) const {
    return data_[linear_offset_unchecked(record, field, num_records_,
                                         num_fields_, policy_)];
  }

  /// Bounds-checked access.
  real_t& at(std::size_t record, std::size_t field);
  real_t at(std::size_t record, std::size_t field) const;

  /// Stride between consecutive records of one field.
  std::ptrdiff_t record_stride() const {
    return policy_ == Layout::record_major
               ? static_cast<std::ptrdiff_t>(num_fields_)
               : 1;
  }
  /// Pointer to (record 0, field). Under field_major the lane is contiguous.
  real_t* field_ptr(std::size_t field) {
    return data_ + linear_offset_unchecked(0, field, num_records_, num_fields_,
                                           policy_);
  }
  const real_t* field_ptr(std::size_t field) const {
    return data_ + linear_offset_unchecked(0, field, num_records_, num_fields_,
                                           policy_);
  }

  void fill(real_t value);

  /// Second handle in the target space. Same label: aliases this allocation.
  /// Different label: fresh zeroed allocation of identical shape and policy.
  FieldedBuffer mirror(SpaceTag target) const;

  bool aliases(const FieldedBuffer& other) const {
    return data_ == other.data_;
  }

private:
  struct Block;
  FieldedBuffer(std::shared_ptr<Block> block, std::size_t num_records,
                std::size_t num_fields, Layout policy, SpaceTag space);

  std::shared_ptr<Block> block_;
  real_t* data_ = nullptr;
  std::size_t num_records_ = 0;
  std::size_t num_fields_ = 0;
  Layout policy_ = Layout::field_major;
  SpaceTag space_;
};

/// Element-wise copy dst(r, f) = src(r, f). Policies may differ; shapes must
/// match. Copies between aliased handles are no-ops and are not counted.
void copy_between(const FieldedBuffer& src, FieldedBuffer& dst);

/// Reduction strategy for concurrent scatter accumulation.
enum class ScatterBackend {
  replicated,     ///< per-worker private copies, merged in ascending worker order
  shared_update,  ///< lost-update-free atomic adds into one shared array
  sequential      ///< single-worker reference; adds applied in call order
};

const char* to_string(ScatterBackend b);

/// Concurrent accumulation container: num_slots x num_lanes cells.
///
/// contribute() may be called concurrently from distinct workers (each worker
/// owns its index). reduce() requires quiescence and returns the dense sums;
/// with the replicated backend the per-worker copies are merged in ascending
/// worker order, which makes the result reproducible for a fixed worker
/// count and work assignment.
class ScatterBuffer {
public:
  ScatterBuffer(std::size_t num_slots, std::size_t num_lanes,
                ScatterBackend backend, int worker_count);

  std::size_t num_slots() const { return num_slots_; }
  std::size_t num_lanes() const { return num_lanes_; }
  ScatterBackend backend() const { return backend_; }
  int worker_count() const { return worker_count_; }

  void contribute(int worker, std::size_t slot, std::size_t lane, real_t value);

  /// Unchecked hot path: adds values[0..num_lanes) onto one slot's row.
  void contribute_row(int worker, std::size_t slot, const real_t* values);

  /// Sum every contribution into dense[slot * num_lanes + lane].
  void reduce(std::span<real_t> dense) const;
  std::vector<real_t> reduce() const;

  void clear();

private:
  real_t* copy_of(int worker) {
    return data_.data() + static_cast<std::size_t>(worker) * copy_stride_;
  }
  const real_t* copy_of(int worker) const {
    return data_.data() + static_cast<std::size_t>(worker) * copy_stride_;
  }

  std::size_t num_slots_;
  std::size_t num_lanes_;
  ScatterBackend backend_;
  int worker_count_;
  std::size_t copy_stride_;  // cache-line padded to keep worker copies apart
  std::vector<real_t> data_;
};

}  // namespace minipic
