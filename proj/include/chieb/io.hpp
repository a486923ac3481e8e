#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chieb/mtest.hpp"
#include "chieb/tweedie.hpp"

namespace chieb {

// CSV with header `id,x[,k]`; optional truth columns `is_null,lambda`.
// Unknown columns are ignored so estimate output can be re-ingested.
Battery ingest_csv(const std::string& path, std::optional<double> default_k = {});

struct EstimateRow {
    std::string id;
    PosteriorSummary summary;
    bool significant = false;
};

std::string format_double(double v);  // shortest round-trip decimal

void write_estimates_csv(const std::string& path, const std::vector<EstimateRow>& rows);
void write_text(const std::string& path, const std::string& content);

}  // namespace chieb
