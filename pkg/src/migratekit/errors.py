"""Exception types shared across the pipeline."""


class MigrateKitError(Exception):
    """Base class for all pipeline errors."""


class IoError(MigrateKitError):
    """A path could not be read."""


class ParseError(MigrateKitError):
    """Input could not be parsed; carries file and line."""

    def __init__(self, message: str, file: str = "", line: int = 0):
        super().__init__(f"{file}:{line}: {message}" if file else message)
        self.file = file
        self.line = line
        self.reason = message


class SymbolNotFound(MigrateKitError):
    """A referenced name has no defining occurrence in the codebase."""

    def __init__(self, name: str):
        super().__init__(f"symbol not found: {name}")
        self.name = name


class AmbiguousSymbol(MigrateKitError):
    """Multiple candidate definitions of the same kind were found."""

    def __init__(self, name: str, candidates):
        locs = ", ".join(f"{f}:{ln}" for f, ln in candidates)
        super().__init__(f"ambiguous symbol {name}: {locs}")
        self.name = name
        self.candidates = list(candidates)


class ContextBudgetExceeded(MigrateKitError):
    def __init__(self, needed: int, budget: int):
        super().__init__(f"context + core needs {needed} lines, budget is {budget}")
        self.needed = needed
        self.budget = budget


class BackendUnavailable(MigrateKitError):
    """Live endpoint unreachable or misconfigured."""


class FixtureMiss(MigrateKitError):
    """Replay backend has no recorded completion for a prompt."""

    def __init__(self, prompt_hash: str):
        super().__init__(f"no recorded completion for prompt sha256 {prompt_hash}")
        self.prompt_hash = prompt_hash


class ToolchainMissing(MigrateKitError):
    """The Rust compiler executable was not found."""


class ScaffoldError(MigrateKitError):
    """Scratch crate generation failed."""


class ConflictingDefinition(MigrateKitError):
    """Same item name with different translated bodies in two units."""

    def __init__(self, name: str, left_id: str, right_id: str):
        super().__init__(f"conflicting definitions of `{name}` from {left_id} and {right_id}")
        self.name = name
        self.left_id = left_id
        self.right_id = right_id


class FallbackMissing(MigrateKitError):
    def __init__(self, core_id: str):
        super().__init__(f"no fallback translation for {core_id}")
        self.core_id = core_id


class EmptyInput(MigrateKitError):
    """An operation that needs at least one element got none."""


class LengthMismatch(MigrateKitError):
    """Parallel sequences have different lengths."""


class ParseFailed(MigrateKitError):
    """Metric input does not parse; counts are unavailable, never guessed."""


class MissingPrerequisite(MigrateKitError):
    """A stage was invoked before the stage that produces its inputs."""

    def __init__(self, artifact: str):
        super().__init__(f"missing prerequisite artifact: {artifact}")
        self.artifact = artifact
