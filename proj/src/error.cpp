#include "mathenc/error.hpp"

namespace mathenc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed_markup: return "MalformedMarkup";
    case ErrorCode::unknown_format: return "UnknownFormat";
    case ErrorCode::missing_file: return "MissingFile";
    case ErrorCode::empty_class: return "EmptyClass";
    case ErrorCode::invalid_manifest: return "InvalidManifest";
    case ErrorCode::duplicate_id: return "DuplicateId";
    case ErrorCode::unknown_label: return "UnknownLabel";
    case ErrorCode::all_bags_empty: return "AllBagsEmpty";
    case ErrorCode::empty_vocabulary: return "EmptyVocabulary";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::degenerate_input: return "DegenerateInput";
    case ErrorCode::single_class_training: return "SingleClassTraining";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::k_too_large: return "KTooLarge";
    case ErrorCode::k_exceeds_samples: return "KExceedsSamples";
    case ErrorCode::non_convergence: return "NonConvergence";
    case ErrorCode::too_few_samples: return "TooFewSamples";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::zero_variance: return "ZeroVariance";
    case ErrorCode::ragged_grid: return "RaggedGrid";
    case ErrorCode::malformed_line: return "MalformedLine";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::io_error: return "IoError";
  }
  return "Error";
}

}  // namespace mathenc
