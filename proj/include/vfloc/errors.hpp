#pragma once

// Error types thrown by the pipeline. Each maps to one failure condition so
// callers (and tests) can catch precisely.

#include <stdexcept>
#include <string>

namespace vfloc {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// grid
struct CycleDetected : Error {
    explicit CycleDetected(const std::string& what) : Error(what) {}
};
struct DisconnectedNode : Error {
    explicit DisconnectedNode(const std::string& what) : Error(what) {}
};
struct NegativeImpedance : Error {
    explicit NegativeImpedance(const std::string& what) : Error(what) {}
};
struct UnknownNode : Error {
    explicit UnknownNode(const std::string& what) : Error(what) {}
};
struct EmptyProfile : Error {
    explicit EmptyProfile(const std::string& what) : Error(what) {}
};

// synth
struct SampleRateTooLow : Error {
    explicit SampleRateTooLow(const std::string& what) : Error(what) {}
};
struct UnknownCase : Error {
    explicit UnknownCase(const std::string& what) : Error(what) {}
};

// demod
struct NoCarrierFound : Error {
    explicit NoCarrierFound(const std::string& what) : Error(what) {}
};
struct SignalTooShort : Error {
    explicit SignalTooShort(const std::string& what) : Error(what) {}
};
struct InvalidRate : Error {
    explicit InvalidRate(const std::string& what) : Error(what) {}
};

// decomposition
struct EmptySignal : Error {
    explicit EmptySignal(const std::string& what) : Error(what) {}
};
struct NotEnoughPeaks : Error {
    int available;
    NotEnoughPeaks(int avail, const std::string& what) : Error(what), available(avail) {}
};
struct InvalidSegmentation : Error {
    explicit InvalidSegmentation(const std::string& what) : Error(what) {}
};

// features
struct NoDominantPeak : Error {
    explicit NoDominantPeak(const std::string& what) : Error(what) {}
};
struct EmptyChanges : Error {
    explicit EmptyChanges(const std::string& what) : Error(what) {}
};

// locator
struct InsufficientMeters : Error {
    explicit InsufficientMeters(const std::string& what) : Error(what) {}
};
struct NoComponentsFound : Error {
    explicit NoComponentsFound(const std::string& what) : Error(what) {}
};

// cli / io
struct ConfigInvalid : Error {
    explicit ConfigInvalid(const std::string& what) : Error(what) {}
};
struct IngestFailed : Error {
    explicit IngestFailed(const std::string& what) : Error(what) {}
};

}  // namespace vfloc
