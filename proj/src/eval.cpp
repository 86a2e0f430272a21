#include "cmind/eval.hpp"

#include <fstream>

#include "cmind/error.hpp"
#include "cmind/util.hpp"

namespace cmind {

using nlohmann::json;

std::vector<EvalCase> load_manifest(const std::filesystem::path& corpus_dir) {
    std::filesystem::path manifest_path = corpus_dir / "manifest.jsonl";
    std::ifstream in(manifest_path);
    if (!in)
        throw Error(ErrorCode::ManifestInvalid, "cannot open " + manifest_path.string());

    std::vector<EvalCase> cases;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ManifestInvalid,
                        manifest_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        EvalCase c;
        c.case_id = record.value("case_id", record.value("id", ""));
        if (c.case_id.empty())
            throw Error(ErrorCode::ManifestInvalid,
                        "line " + std::to_string(line_no) + ": missing case_id");
        if (!record.contains("report") || !record.contains("source"))
            throw Error(ErrorCode::ManifestInvalid,
                        c.case_id + ": 'report' and 'source' are required");
        c.report_path = corpus_dir / record.at("report").get<std::string>();
        c.source_path = corpus_dir / record.at("source").get<std::string>();
        if (record.contains("transcript"))
            c.transcript_path = corpus_dir / record.at("transcript").get<std::string>();
        for (const auto& name : record.value("ground_truth", json::array()))
            c.ground_truth.push_back(name.get<std::string>());
        if (c.ground_truth.empty())
            throw Error(ErrorCode::ManifestInvalid, c.case_id + ": ground_truth must be non-empty");
        cases.push_back(std::move(c));
    }
    if (cases.empty())
        throw Error(ErrorCode::ManifestInvalid, manifest_path.string() + " lists no cases");
    return cases;
}

Verdict judge(const LocalizationResult& result, const std::vector<std::string>& truth) {
    Verdict verdict;
    if (result.status != RunStatus::completed) return verdict;
    for (const auto& name : truth) {
        if (contains_identifier_token(result.hypothesis, name) ||
            contains_identifier_token(result.summary, name)) {
            verdict.correct = true;
            verdict.matched_name = name;
            return verdict;
        }
    }
    return verdict;
}

EvalReport run_corpus(const std::filesystem::path& corpus_dir,
                      const PipelineConfig& base_config,
                      const std::string& model_label) {
    std::vector<EvalCase> cases = load_manifest(corpus_dir);

    EvalReport report;
    report.model_label = model_label.empty() ? base_config.llm.model_name : model_label;
    for (const auto& c : cases) {
        EvalCaseResult case_result;
        case_result.case_id = c.case_id;
        try {
            BugReport bug_report = BugReport::from_file(c.report_path);
            SourceTree tree = load_source_tree(c.source_path);
            PipelineConfig config = base_config;
            if (c.transcript_path) {
                config.llm.backend = LlmBackend::scripted;
                config.llm.transcript_path = c.transcript_path->string();
            }
            LlmGateway gateway(config.llm);
            LocalizationResult result = run_pipeline(bug_report, tree, config, gateway);
            Verdict verdict = judge(result, c.ground_truth);
            case_result.correct = verdict.correct;
            case_result.matched_name = verdict.matched_name;
            case_result.status = result.status;
            case_result.hypothesis = result.hypothesis;
            case_result.summary = result.summary;
        } catch (const std::exception& e) {
            case_result.correct = false;
            case_result.status = RunStatus::failed;
            case_result.hypothesis = std::string("case error: ") + e.what();
        }
        report.per_case.push_back(std::move(case_result));
    }

    report.total = static_cast<int>(report.per_case.size());
    for (const auto& r : report.per_case) report.correct += r.correct ? 1 : 0;
    report.incorrect = report.total - report.correct;
    return report;
}

json EvalReport::to_json() const {
    json per = json::array();
    for (const auto& r : per_case) {
        per.push_back({{"case_id", r.case_id},
                       {"verdict", r.correct ? "correct" : "incorrect"},
                       {"matched_name", r.matched_name},
                       {"status", run_status_name(r.status)}});
    }
    return json{{"model", model_label},
                {"total", total},
                {"correct", correct},
                {"incorrect", incorrect},
                {"per_case", per}};
}

std::string EvalReport::render_table() const {
    std::string header = "Models | Number of reports | Correct | Incorrect";
    std::string row = model_label + " | " + std::to_string(total) + " | " +
                      std::to_string(correct) + " | " + std::to_string(incorrect);
    return header + "\n" + row + "\n";
}

} // namespace cmind
