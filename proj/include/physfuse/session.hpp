#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "physfuse/core_types.hpp"
#include "physfuse/dirichlet.hpp"
#include "physfuse/mixture.hpp"
#include "physfuse/observations_io.hpp"

namespace physfuse {

inline constexpr int kSnapshotVersion = 1;

struct FusionConfig {
  double lambda = 1.0;
  /// Empty means the uniform all-ones prior.
  std::vector<double> alpha0;
  PosteriorBackend backend = PosteriorBackend::nig;
};

struct FusionCounters {
  std::uint64_t seen = 0;
  std::uint64_t absorbed = 0;
  std::uint64_t rejected = 0;
  /// Property entries skipped because the library does not declare them.
  std::uint64_t ignored_properties = 0;
  std::map<std::string, std::uint64_t> per_view;

  friend bool operator==(const FusionCounters&, const FusionCounters&) = default;
};

/// All beliefs for one segment. Every library property has K cells, starting
/// from the library prior.
struct SegmentState {
  DirichletBelief classes;
  std::map<std::string, std::vector<ClassPropertyState>> properties;
  std::uint64_t observations = 0;

  friend bool operator==(const SegmentState&, const SegmentState&) = default;
};

struct RecordOutcome {
  bool absorbed = false;
  std::string reason;  // why the record was rejected
};

/// Streaming fusion state: one Dirichlet belief per segment plus NIG and
/// moment accumulators per (segment, material, property).
class FusionSession {
 public:
  explicit FusionSession(MaterialLibrary library, FusionConfig config = {});

  [[nodiscard]] const MaterialLibrary& library() const { return library_; }
  [[nodiscard]] const FusionConfig& config() const { return config_; }
  [[nodiscard]] const FusionCounters& counters() const { return counters_; }
  [[nodiscard]] const std::map<std::string, SegmentState>& segments() const { return segments_; }

  /// Creates a prior-only segment if it does not exist yet.
  SegmentState& ensure_segment(const std::string& segment_id);
  [[nodiscard]] const SegmentState* find_segment(std::string_view segment_id) const;

  /// Fuses one record: Dirichlet update on its class, NIG and moment updates
  /// for every declared property it carries. Invalid records are counted as
  /// rejected and leave the beliefs untouched.
  RecordOutcome absorb(const ObservationRecord& record);

  /// Counts units rejected upstream (e.g. by the parser) as seen and rejected.
  void count_rejected(std::uint64_t n);

  [[nodiscard]] MixturePredictive mixture(const SegmentState& seg, const std::string& property) const;
  [[nodiscard]] UncertaintyReport uncertainty(const SegmentState& seg, const std::string& property) const;

  /// Versioned JSON of every belief parameter. Doubles round-trip bit-exactly.
  [[nodiscard]] std::string snapshot() const;
  [[nodiscard]] nlohmann::json snapshot_json() const;
  /// Throws ValidationError with the offending JSON path on corrupt input.
  static FusionSession restore(std::string_view bytes);

  /// Per-segment class posterior and per-property estimates.
  [[nodiscard]] nlohmann::json report() const;

  friend bool operator==(const FusionSession&, const FusionSession&);

 private:
  [[nodiscard]] SegmentState fresh_segment() const;

  MaterialLibrary library_;
  FusionConfig config_;
  FusionCounters counters_;
  std::map<std::string, SegmentState> segments_;
};

/// Pure fold of absorb() over the records.
FusionSession fuse_stream(FusionSession session, std::span<const ObservationRecord> records);

/// fuse_stream over parsed records; parser rejects are added to the counters
/// so that absorbed + rejected == seen covers the whole file.
FusionSession fuse_parsed(FusionSession session, const ParseResult& parsed);

}  // namespace physfuse
