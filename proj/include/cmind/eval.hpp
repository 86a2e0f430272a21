#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmind/pipeline.hpp"

namespace cmind {

struct EvalCase {
    std::string case_id;
    std::filesystem::path report_path;
    std::filesystem::path source_path;
    std::optional<std::filesystem::path> transcript_path;
    std::vector<std::string> ground_truth; // acceptable function names / file paths
};

struct EvalCaseResult {
    std::string case_id;
    bool correct = false;
    std::string matched_name; // the ground-truth token that matched
    RunStatus status = RunStatus::failed;
    std::string hypothesis;
    std::string summary;
};

struct EvalReport {
    std::string model_label;
    int total = 0;
    int correct = 0;
    int incorrect = 0;
    std::vector<EvalCaseResult> per_case;

    nlohmann::json to_json() const;
    /// Plain-text table: Models | Number of reports | Correct | Incorrect.
    std::string render_table() const;
};

/// Reads manifest.jsonl (one JSON object per case, paths relative to the
/// corpus dir). Throws ManifestInvalid for unreadable, empty, or malformed
/// manifests.
std::vector<EvalCase> load_manifest(const std::filesystem::path& corpus_dir);

/// Correct iff any ground-truth name appears, case-sensitively as a whole
/// identifier token, in the hypothesis or summary; failed/inconclusive runs
/// are incorrect.
struct Verdict {
    bool correct = false;
    std::string matched_name;
};
Verdict judge(const LocalizationResult& result, const std::vector<std::string>& truth);

/// Runs the pipeline per case (scripted when a transcript is present) and
/// assembles the Table-1-style accounting.
EvalReport run_corpus(const std::filesystem::path& corpus_dir,
                      const PipelineConfig& base_config,
                      const std::string& model_label);

} // namespace cmind
