#pragma once

#include <filesystem>
#include <iosfwd>

#include "prism/sample.hpp"

namespace prism::corpus {

/// Loads a JSONL ranking dataset, preserving file order.
///
/// Each line is a self-contained record:
///   {"sample_id": str, "task": "document"|"chunk", "query": str,
///    "candidates": [{"index": int, "doc_type": str?, "text": str}],
///    "gains": [int]?}
///
/// Structurally malformed lines (unparseable JSON, missing or mistyped
/// required fields, unknown task or doc_type strings) abort the load with a
/// DatasetError naming the line. Records that parse but violate a sample
/// invariant (gain list length mismatch, duplicate candidate index, wrong
/// candidate shape for the task, ...) are rejected individually and reported
/// in SampleSet::rejected.
SampleSet load_dataset(const std::filesystem::path& path, Task task);

SampleSet load_dataset(std::istream& in, Task task);

void save_dataset(const std::filesystem::path& path, const SampleSet& set);

}  // namespace prism::corpus
