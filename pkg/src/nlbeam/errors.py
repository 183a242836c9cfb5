"""Exception hierarchy shared across the package."""


class NlbeamError(Exception):
    """Base class for all package-specific errors."""


# --- registry ---

class MalformedRegistry(NlbeamError):
    def __init__(self, message, entry_id=None):
        super().__init__(message)
        self.entry_id = entry_id


class DuplicateId(MalformedRegistry):
    pass


class InvalidEntry(NlbeamError):
    pass


class MissingBasePrompt(NlbeamError):
    pass


# --- backends ---

class BackendError(NlbeamError):
    pass


class Timeout(BackendError):
    pass


class Unreachable(BackendError):
    pass


class NoRuleMatched(BackendError):
    pass


# --- cog pipeline ---

class ClassifierUnavailable(NlbeamError):
    pass


class EmptyCode(NlbeamError):
    pass


class UnknownProtocol(NlbeamError):
    pass


class MalformedRefinement(NlbeamError):
    pass


class StorageUnavailable(NlbeamError):
    pass


class UnknownAction(NlbeamError):
    pass


class AlreadyFinalized(NlbeamError):
    pass


# --- chatbot ---

class RouterUnavailable(NlbeamError):
    pass


class EmptyCorpus(NlbeamError):
    pass


# --- command-language simulator ---

class CommandSyntaxError(NlbeamError):
    def __init__(self, message, line=None, col=None):
        super().__init__(message)
        self.line = line
        self.col = col


class UnknownFunction(NlbeamError):
    def __init__(self, name):
        super().__init__(f"UNKNOWN FUNCTION: {name}")
        self.name = name


class UnsupportedConstruct(CommandSyntaxError):
    pass


class SimBudgetExceeded(NlbeamError):
    pass


class SimNameError(NlbeamError):
    pass


class InvalidArgs(NlbeamError):
    pass


class SimDivisionByZero(NlbeamError):
    pass


# --- analysis engine ---

class RingOutOfRange(NlbeamError):
    pass


class EmptyROI(NlbeamError):
    pass


class FitDiverged(NlbeamError):
    pass


# --- eval harness ---

class LengthMismatch(NlbeamError):
    pass


class EmptyReference(NlbeamError):
    pass


class InvalidWeights(NlbeamError):
    pass


class DatasetMalformed(NlbeamError):
    def __init__(self, message, case_index=None):
        super().__init__(message)
        self.case_index = case_index


# --- gateway ---

class ChannelUnavailable(NlbeamError):
    pass


class SchemaMismatch(NlbeamError):
    pass


class BadConfig(NlbeamError):
    pass
