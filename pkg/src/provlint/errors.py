"""Exception types raised across the library.

Grouped by the layer that raises them; everything derives from
:class:`ProvlintError` so callers (notably the CLI) can catch one base
class and map it to a usage/input failure.
"""


class ProvlintError(Exception):
    """Base class for all provlint errors."""


# --- document model ---------------------------------------------------------

class DuplicateIdError(ProvlintError):
    """An element with this (kind, id) already exists in the document."""


class UndeclaredPrefixError(ProvlintError):
    """A qualified name uses a prefix the document does not declare."""


class KindMismatchError(ProvlintError):
    """A relation endpoint resolves to an element of the wrong kind."""


class UnknownIdError(ProvlintError):
    """An identifier does not name any element in the document."""


# --- PROV-JSON I/O -----------------------------------------------------------

class MalformedJsonError(ProvlintError):
    """Input is not parseable JSON or not a PROV-JSON object."""


class MissingEndpointKeyError(ProvlintError):
    """A relation entry lacks a required endpoint key (strict mode)."""


# --- run builder -------------------------------------------------------------

class InvalidNamespaceError(ProvlintError):
    """Namespace or experiment name is empty or not a usable token."""


class DuplicateNameError(ProvlintError):
    """A dataset name was already logged in this run."""


class UnknownInputError(ProvlintError):
    """The referenced input entity does not exist in the run document."""


class EmptyFeatureListError(ProvlintError):
    """Feature selection was given no features, or duplicate names."""


class InvalidCfRecordError(ProvlintError):
    """A counterfactual record failed validation and cannot be logged."""


class AlreadyEndedError(ProvlintError):
    """end_run was called more than once on the same builder."""


class IoFailureError(ProvlintError):
    """Writing run outputs to disk failed."""


# --- requirement DSL ---------------------------------------------------------

class DslSyntaxError(ProvlintError):
    """Requirement source failed to parse; carries line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DuplicateRequirementIdError(ProvlintError):
    """Two requirements share an id."""


class UnknownParentError(ProvlintError):
    """A PARENT reference names no requirement in the file."""


class ParentCycleError(ProvlintError):
    """PARENT links form a cycle."""


# --- replay ------------------------------------------------------------------

class MissingTrainingDataError(ProvlintError):
    """No dataset entity with role=training in the document."""


class MissingModelError(ProvlintError):
    """No linear-regression model entity, or it lacks logged coefficients."""


class BrokenChainError(ProvlintError):
    """A pipeline step input or dataset payload cannot be resolved."""


class UnknownStepKindError(ProvlintError):
    """Preprocessing step kind is not one the replay engine supports."""


class ZeroVarianceError(ProvlintError):
    """standardize applied to a constant column."""


class ZeroRangeError(ProvlintError):
    """minmax_normalize applied to a constant column."""


class EmptyAfterDropError(ProvlintError):
    """dropna removed every row."""


class LengthMismatchError(ProvlintError):
    """x and y columns have different lengths."""


class DegenerateInputError(ProvlintError):
    """Regression input is too small or has a constant x column."""


# --- counterfactual mapping --------------------------------------------------

class MalformedPayloadError(ProvlintError):
    """A counterfactual payload is not valid canonical JSON."""


class SchemaMismatchError(ProvlintError):
    """Counterfactual feature keys do not match the query's keys."""


class EmptyInputError(ProvlintError):
    """No records (or no counterfactuals) to summarize."""


class InconsistentFeaturesError(ProvlintError):
    """Records in one summary do not share a feature-key set."""


class NoPointsForClassError(ProvlintError):
    """No counterfactual is predicted as the requested class."""


class UnknownFeatureError(ProvlintError):
    """A requested feature does not appear in the records."""


class NoCeEntitiesError(ProvlintError):
    """The document holds no counterfactual-explanation entities."""
