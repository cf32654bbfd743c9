#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbdc {

// Names are part of the external contract: the gateway reports them verbatim.
enum class ErrorCode {
  UnsupportedBitSize,
  NotCoprime,
  OutOfRange,
  MalformedSerial,
  WrongOwnerKey,
  UnverifiableAsset,
  CannotMakeAmount,
  AlreadySpent,
  InvalidAsset,
  HotAsset,
  QuorumTimeout,
  UnknownBank,
  DuplicateBank,
  UnknownDenomination,
  UnknownAccount,
  InsufficientFunds,
  AmountMismatch,
  WrongRecipient,
  InvalidArgument,
  VerificationFailed,
  InvoiceExpired,
  CorruptFile,
  BadCertificate,
  WrongInvoice,
  Expired,
  ConfigInvalid,
  UnknownFaultKind,
  UnknownActor,
};

inline constexpr ErrorCode kAllErrorCodes[] = {
    ErrorCode::UnsupportedBitSize, ErrorCode::NotCoprime,
    ErrorCode::OutOfRange,         ErrorCode::MalformedSerial,
    ErrorCode::WrongOwnerKey,      ErrorCode::UnverifiableAsset,
    ErrorCode::CannotMakeAmount,   ErrorCode::AlreadySpent,
    ErrorCode::InvalidAsset,       ErrorCode::HotAsset,
    ErrorCode::QuorumTimeout,      ErrorCode::UnknownBank,
    ErrorCode::DuplicateBank,      ErrorCode::UnknownDenomination,
    ErrorCode::UnknownAccount,     ErrorCode::InsufficientFunds,
    ErrorCode::AmountMismatch,     ErrorCode::WrongRecipient,
    ErrorCode::InvalidArgument,    ErrorCode::VerificationFailed,
    ErrorCode::InvoiceExpired,     ErrorCode::CorruptFile,
    ErrorCode::BadCertificate,     ErrorCode::WrongInvoice,
    ErrorCode::Expired,            ErrorCode::ConfigInvalid,
    ErrorCode::UnknownFaultKind,   ErrorCode::UnknownActor,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw ProtocolError(code, message);
}

}  // namespace cbdc
