#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lta/anchoring.hpp"
#include "lta/corpus.hpp"
#include "lta/taxonomy.hpp"

namespace lta {

struct DecodeParams {
    double temperature = 0.7;
    int max_tokens = 1024;
};

/// Text generator abstraction. Implementations must be safe for concurrent
/// generate() calls; transport problems are reported via TransportError.
class GeneratorBackend {
public:
    virtual ~GeneratorBackend() = default;
    virtual std::string id() const = 0;
    virtual std::string generate(const std::string& prompt, const DecodeParams& params) = 0;
};

/// Deterministic offline backend: same (prompt, seed) always yields the same
/// pseudo discharge summary, assembled from the definitions section of the
/// prompt itself.
class MockBackend : public GeneratorBackend {
public:
    explicit MockBackend(std::uint64_t seed) : seed_(seed) {}
    std::string id() const override { return "mock"; }
    std::string generate(const std::string& prompt, const DecodeParams& params) override;

private:
    std::uint64_t seed_;
};

std::string mock_generate(const std::string& prompt, std::uint64_t seed);

/// POSTs {"prompt", "max_tokens", "temperature"} to `url` with a bearer token
/// and expects {"text": ...}. Vendor-specific schemas belong in an adapter in
/// front of this, not in core.
class HttpBackend : public GeneratorBackend {
public:
    HttpBackend(std::string url, std::string api_key,
                std::chrono::milliseconds timeout = std::chrono::milliseconds(30000));
    std::string id() const override { return "http"; }
    std::string generate(const std::string& prompt, const DecodeParams& params) override;

private:
    std::string url_;
    std::string api_key_;
    std::chrono::milliseconds timeout_;
};

/// Fraction of codes whose description or any synonym is evidenced by the
/// text. A phrase matches when at least 60% of its content words (length >= 4,
/// stopwords removed, case-insensitive) appear in the text.
double validate_alignment(const std::string& text, const AnchoredCodeSet& cs,
                          const Taxonomy& taxonomy);

struct AlignmentGate {
    double min_alignment = 0.5;
    int max_regen = 2;  // extra generations allowed below the gate
};

struct RetryPolicy {
    int max_retries = 3;  // transient transport retries per generation
    std::chrono::milliseconds base_delay{250};
    std::chrono::milliseconds max_delay{5000};
};

struct SyntheticNote {
    Note note;  // origin=synthetic, anchor set, id "syn-{anchor}-{replicate}"
    std::string prompt_hash;
    std::string backend;
    int attempt = 1;        // total generations performed
    double alignment = 0.0;
};

/// Generate one note, regenerating up to gate.max_regen extra times while the
/// alignment score stays below the gate; the best-scoring attempt wins.
/// Transient transport errors are retried with exponential backoff per
/// `retry`; exhaustion raises GenerationFailedError.
SyntheticNote generate_one(const std::string& prompt, const AnchoredCodeSet& cs,
                           GeneratorBackend& backend, const DecodeParams& params,
                           const AlignmentGate& gate, const RetryPolicy& retry,
                           const Taxonomy& taxonomy);

struct ConcurrencyConfig {
    int max_in_flight = 4;
    std::chrono::milliseconds timeout{30000};  // per-request; enforced by the backend
    RetryPolicy retry;
};

struct GenerationFailure {
    CodeId anchor;
    int replicate = 0;
    std::string reason;
    int attempts = 0;
};

struct BatchResult {
    std::vector<SyntheticNote> notes;        // input order, failures removed
    std::vector<GenerationFailure> failures;  // input order
};

/// Drive the backend over an aligned (prompts[i], codesets[i]) batch with at
/// most cc.max_in_flight requests outstanding. Output order is the input
/// order regardless of completion order; hard failures become report rows,
/// never exceptions.
BatchResult run_batch(const std::vector<std::string>& prompts,
                      const std::vector<AnchoredCodeSet>& codesets, GeneratorBackend& backend,
                      const ConcurrencyConfig& cc, const AlignmentGate& gate,
                      const DecodeParams& params, const Taxonomy& taxonomy);

/// Corpus-schema JSONL lines plus prompt_hash/backend/attempt/alignment.
std::string synthetic_notes_to_jsonl(const std::vector<SyntheticNote>& notes);
std::vector<SyntheticNote> synthetic_notes_from_jsonl(std::string_view text);

/// JSONL rows {"anchor","replicate","reason","attempts"}.
std::string failures_to_jsonl(const std::vector<GenerationFailure>& failures);

std::string prompt_digest(std::string_view prompt);

}  // namespace lta
