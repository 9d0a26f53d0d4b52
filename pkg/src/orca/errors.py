"""Exception hierarchy shared across the package.

Every raised condition that callers are expected to branch on gets its own
class; generic misuse stays on ValueError.
"""


class OrcaError(Exception):
    """Base class for all package-specific errors."""


# --- provider ---------------------------------------------------------------

class ProviderUnavailable(OrcaError):
    """The model backend could not be reached or refused the call."""


class ScriptExhausted(OrcaError):
    """The scripted mock provider ran out of queued responses."""


class ScriptMismatch(OrcaError):
    """The next scripted response does not match the incoming prompt."""


class ParseFailure(OrcaError):
    """Structured output could not be recovered after the repair retry."""


# --- catalog ----------------------------------------------------------------

class ConnectionFailed(OrcaError):
    pass


class EmptyDatabase(OrcaError):
    pass


class StateDirUnwritable(OrcaError):
    pass


class UnknownDatabaseId(OrcaError):
    pass


class UnknownTable(OrcaError):
    pass


# --- router -----------------------------------------------------------------

class EmptyQuery(OrcaError):
    pass


class NoPendingClarification(OrcaError):
    pass


# --- recommender ------------------------------------------------------------

class EmbeddingsMissing(OrcaError):
    pass


class NoTablesSelected(OrcaError):
    pass


# --- text2sql ---------------------------------------------------------------

class GenerationParseFailure(OrcaError):
    pass


class ForbiddenStatement(OrcaError):
    """A write/DDL or multi-statement body was refused before execution."""


class AttemptsExhausted(OrcaError):
    pass


# --- causal engine ----------------------------------------------------------

class GraphError(OrcaError):
    pass


class CyclicGraph(GraphError):
    pass


class DuplicateNode(GraphError):
    pass


class DanglingEdge(GraphError):
    pass


class NotIdentifiable(OrcaError):
    """No observable adjustment set blocks every backdoor path."""


class SingularDesign(OrcaError):
    pass


class InsufficientRows(OrcaError):
    pass


class NonBinaryTreatment(OrcaError):
    pass


class Nonconvergence(OrcaError):
    pass


class EmptyArm(OrcaError):
    """One treatment arm has no observations."""


# --- analyzer ---------------------------------------------------------------

class RetrievalFailed(OrcaError):
    """Data retrieval through the SQL pipeline did not reach success."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class EmptyDataset(OrcaError):
    pass


class TreatmentNotBinaryOrNumeric(OrcaError):
    pass


class OutcomeNotNumeric(OrcaError):
    pass


class HighCardinalityColumn(OrcaError):
    """A string covariate exceeds the one-hot cardinality bound."""


# --- generator --------------------------------------------------------------

class InvalidConfig(OrcaError):
    pass


class TreatmentNotInDgp(OrcaError):
    """The requested treatment variable has no causal mechanism."""


class TargetNotEmpty(OrcaError):
    pass


# --- evaluation -------------------------------------------------------------

class EmptyExampleSet(OrcaError):
    pass


class GoldSqlFails(OrcaError):
    pass


class JudgeUnavailable(OrcaError):
    pass


class FixtureMissing(OrcaError):
    pass


# --- service ----------------------------------------------------------------

class SessionBusy(OrcaError):
    pass


class UnknownSession(OrcaError):
    pass


class NothingToRefine(OrcaError):
    pass


class UnknownArtifact(OrcaError):
    pass
