from typing import Dict, Any, Optional, Iterable
from fastapi import HTTPException, status

# Base error class
class BaseError(Exception):
    """Base class for all application-specific exceptions"""
    status_code: int = status.HTTP_500_INTERNAL_SERVER_ERROR
    detail: str = "An error occurred"
    error_code: str = "internal_error"

    def __init__(
        self,
        detail: Optional[str] = None,
        status_code: Optional[int] = None,
        error_code: Optional[str] = None,
        context: Optional[Dict[str, Any]] = None
    ):
        self.detail = detail or self.detail
        self.status_code = status_code or self.status_code
        self.error_code = error_code or self.error_code
        self.context = context or {}
        super().__init__(self.detail)

    def to_http_exception(self) -> HTTPException:
        """Convert to FastAPI HTTPException"""
        error_detail = {
            "error_code": self.error_code,
            "message": self.detail
        }

        # Add context if available
        if self.context:
            error_detail["context"] = self.context

        return HTTPException(
            status_code=self.status_code,
            detail=error_detail
        )


# Configuration errors
class ConfigurationError(BaseError):
    """Error related to system configuration"""
    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    detail = "Configuration error"
    error_code = "configuration_error"


# Parsing errors
class ParseError(BaseError):
    """Base class for errors raised while reading C source"""
    status_code = status.HTTP_400_BAD_REQUEST
    detail = "Parse error"
    error_code = "parse_error"


class CSyntaxError(ParseError):
    """Malformed input under the restricted C grammar"""
    detail = "Syntax error"
    error_code = "syntax_error"

    def __init__(
        self,
        message: str,
        line: int,
        column: int,
        expected: Iterable[str] = (),
        **kwargs
    ):
        self.line = line
        self.column = column
        self.expected = sorted(set(expected))
        context = {"line": line, "column": column, "expected": self.expected}
        super().__init__(
            detail=f"{message} at line {line}, column {column}",
            context=context,
            **kwargs
        )


class EmptySnippetError(ParseError):
    """Snippet has no terminal tokens to build path contexts from"""
    detail = "Snippet contains no terminals"
    error_code = "empty_snippet"


# Numerical errors
class NumericsError(BaseError):
    """Base class for neural-network substrate errors"""
    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    detail = "Numerical error"
    error_code = "numerics_error"


class DimMismatchError(NumericsError):
    """Tensor shapes do not line up"""
    status_code = status.HTTP_400_BAD_REQUEST
    detail = "Dimension mismatch"
    error_code = "dim_mismatch"

    def __init__(self, expected: Any, got: Any, what: str = "input", **kwargs):
        super().__init__(
            detail=f"Dimension mismatch for {what}: expected {expected}, got {got}",
            context={"what": what, "expected": str(expected), "got": str(got)},
            **kwargs
        )


class NonFiniteError(NumericsError):
    """A NaN or Inf escaped a tensor operation"""
    detail = "Non-finite value produced"
    error_code = "non_finite"


class UnknownActivationError(NumericsError):
    """Layer activation is not one of the supported functions"""
    status_code = status.HTTP_400_BAD_REQUEST
    detail = "Unknown activation"
    error_code = "unknown_activation"


# Agent errors
class AgentError(BaseError):
    """Base class for policy and training errors"""
    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    detail = "Agent error"
    error_code = "agent_error"


class EmptyBatchError(AgentError):
    """PPO update called without transitions"""
    status_code = status.HTTP_400_BAD_REQUEST
    detail = "Cannot update on an empty batch"
    error_code = "empty_batch"


class SchemaError(AgentError):
    """Checkpoint file is malformed"""
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    detail = "Malformed checkpoint"
    error_code = "schema_error"


class ActionOutOfRangeError(AgentError):
    """Action index or grid position lies outside the action space"""
    status_code = status.HTTP_400_BAD_REQUEST
    detail = "Action outside the action space"
    error_code = "action_out_of_range"


# Environment errors
class MeasurementError(BaseError):
    """Base class for measurement environment errors"""
    status_code = status.HTTP_503_SERVICE_UNAVAILABLE
    detail = "Environment error"
    error_code = "environment_error"


class NonPositiveTimeError(MeasurementError):
    """A time that must be positive was not"""
    status_code = status.HTTP_400_BAD_REQUEST
    detail = "Times must be strictly positive"
    error_code = "non_positive_time"


class BackendUnavailableError(MeasurementError):
    """The requested measurement backend cannot be used"""
    detail = "Backend unavailable"
    error_code = "backend_unavailable"


class CompilerNotFoundError(BackendUnavailableError):
    """The configured C compiler binary cannot be located"""
    detail = "C compiler not found"
    error_code = "compiler_not_found"


class BaselineCompileFailedError(MeasurementError):
    """The unmodified program does not compile or run"""
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    detail = "Baseline compile failed"
    error_code = "baseline_compile_failed"


class CompileError(MeasurementError):
    """Compiler exited with a non-zero status"""
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    detail = "Compilation failed"
    error_code = "compile_error"

    def __init__(self, stderr: str, **kwargs):
        excerpt = stderr.strip()[-800:]
        super().__init__(
            detail=f"Compilation failed: {excerpt}",
            context={"stderr": excerpt},
            **kwargs
        )


class RunTimeoutError(MeasurementError):
    """Program exceeded its wall-clock budget"""
    status_code = status.HTTP_504_GATEWAY_TIMEOUT
    detail = "Execution timed out"
    error_code = "run_timeout"


# Rewriter errors
class RewriteError(BaseError):
    """Base class for pragma rewriting errors"""
    status_code = status.HTTP_409_CONFLICT
    detail = "Rewrite error"
    error_code = "rewrite_error"


class StaleNestError(RewriteError):
    """Loop nest was not extracted from this source"""
    detail = "Loop nest does not belong to this source"
    error_code = "stale_nest"


class AlreadyInjectedError(RewriteError):
    """A framework pragma is already present at the anchor"""
    detail = "Pragma already injected"
    error_code = "already_injected"


class NoPragmaFoundError(RewriteError):
    """No framework pragma at the anchor"""
    status_code = status.HTTP_404_NOT_FOUND
    detail = "No injected pragma found"
    error_code = "no_pragma_found"


class InvalidFactorError(RewriteError):
    """Vectorization or interleave factor is not a power of two"""
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    detail = "Factors must be powers of two"
    error_code = "invalid_factor"


# Dataset errors
class DatasetError(BaseError):
    """Base class for corpus generation and labeling errors"""
    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    detail = "Dataset error"
    error_code = "dataset_error"


class TemplateInstantiationError(DatasetError):
    """A template produced code that does not parse"""
    detail = "Template produced invalid code"
    error_code = "template_instantiation_failed"


class MissingOracleResultError(DatasetError):
    """Oracle labels do not cover the manifest"""
    status_code = status.HTTP_400_BAD_REQUEST
    detail = "Missing oracle result"
    error_code = "missing_oracle_result"


class UnknownTemplateError(DatasetError):
    """A requested loop template id does not exist"""
    status_code = status.HTTP_400_BAD_REQUEST
    detail = "Unknown template"
    error_code = "unknown_template"


# Model errors
class ModelError(BaseError):
    """Base class for predictor errors"""
    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    detail = "Model error"
    error_code = "model_error"


class EmptyModelError(ModelError):
    """Predictor has no training data"""
    status_code = status.HTTP_400_BAD_REQUEST
    detail = "Model has no training data"
    error_code = "empty_model"


class MissingModelError(ModelError):
    """A requested method has no trained model or labels"""
    status_code = status.HTTP_423_LOCKED
    detail = "Model not available"
    error_code = "missing_model"


class NotABaselineModelError(ModelError):
    """Object handed to persistence is not a baseline predictor"""
    status_code = status.HTTP_400_BAD_REQUEST
    detail = "Not a baseline model"
    error_code = "not_a_baseline_model"


class NestNotFoundError(ParseError):
    """No loop nest matches the requested index or id"""
    status_code = status.HTTP_404_NOT_FOUND
    detail = "Loop nest not found"
    error_code = "nest_not_found"
