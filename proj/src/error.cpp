#include "cbdc/error.hpp"

namespace cbdc {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnsupportedBitSize: return "UnsupportedBitSize";
    case ErrorCode::NotCoprime: return "NotCoprime";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::MalformedSerial: return "MalformedSerial";
    case ErrorCode::WrongOwnerKey: return "WrongOwnerKey";
    case ErrorCode::UnverifiableAsset: return "UnverifiableAsset";
    case ErrorCode::CannotMakeAmount: return "CannotMakeAmount";
    case ErrorCode::AlreadySpent: return "AlreadySpent";
    case ErrorCode::InvalidAsset: return "InvalidAsset";
    case ErrorCode::HotAsset: return "HotAsset";
    case ErrorCode::QuorumTimeout: return "QuorumTimeout";
    case ErrorCode::UnknownBank: return "UnknownBank";
    case ErrorCode::DuplicateBank: return "DuplicateBank";
    case ErrorCode::UnknownDenomination: return "UnknownDenomination";
    case ErrorCode::UnknownAccount: return "UnknownAccount";
    case ErrorCode::InsufficientFunds: return "InsufficientFunds";
    case ErrorCode::AmountMismatch: return "AmountMismatch";
    case ErrorCode::WrongRecipient: return "WrongRecipient";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
    case ErrorCode::InvoiceExpired: return "InvoiceExpired";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::BadCertificate: return "BadCertificate";
    case ErrorCode::WrongInvoice: return "WrongInvoice";
    case ErrorCode::Expired: return "Expired";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::UnknownFaultKind: return "UnknownFaultKind";
    case ErrorCode::UnknownActor: return "UnknownActor";
  }
  return "Unknown";
}

}  // namespace cbdc
