#pragma once

#include "promptloop/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace promptloop {

enum class Split { train, validation, test };

const char* to_string(Split s);
std::optional<Split> split_from_string(const std::string& s);

/// Declared split sizes per benchmark (train/validation/test).
struct SplitSpec {
    TaskKind dataset;
    int train = 0;
    int validation = 0;
    int test = 0;

    int size_of(Split s) const;
};

SplitSpec split_spec(TaskKind dataset);

/// Loads one split from the dataset's public distribution files under
/// data_dir. Returns exactly the declared number of queries, each with gold
/// populated, in a deterministic order; anything else fails loudly.
///
/// Expected file layout (created by the fetch command; see README):
///   <data_dir>/object_counting/object_counting.json   BBH task file
///   <data_dir>/word_sorting/word_sorting.json         BBH task file
///   <data_dir>/gsm8k/train.jsonl, test.jsonl
///   <data_dir>/svamp/trainval.json, test.json
///   <data_dir>/aquarat/train.jsonl, dev.jsonl, test.jsonl
std::vector<Query> load_split(TaskKind dataset, Split split,
                              const std::filesystem::path& data_dir);

/// Task-specific deterministic answer extraction from raw model output.
/// Returns nullopt when no answer can be extracted (unparseable).
std::optional<NormalizedAnswer> extract_answer(TaskKind task, const std::string& raw);

/// Parses a gold answer from its source-file representation.
NormalizedAnswer gold_number(const std::string& raw);
NormalizedAnswer gold_words(const std::string& space_separated);
NormalizedAnswer gold_choice(const std::string& letter);
/// GSM8K solutions carry the gold after a "####" marker.
NormalizedAnswer gold_from_gsm8k_solution(const std::string& solution);

}  // namespace promptloop
