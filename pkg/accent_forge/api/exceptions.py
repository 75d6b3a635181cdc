"""
Exceções customizadas do accent-forge.
Permite tratamento de erros específico e códigos de saída padronizados na CLI.
"""


class AccentForgeException(Exception):
    """Exceção base para todas as exceções do accent-forge."""

    def __init__(self, message: str, code: str = "ACCENT_FORGE_ERROR"):
        self.message = message
        self.code = code
        super().__init__(self.message)


class NotFoundError(AccentForgeException):
    """Exceção lançada quando um recurso (arquivo, engine, registro) não é encontrado."""

    def __init__(self, resource: str, resource_id: str = None):
        self.resource = resource
        self.resource_id = resource_id
        message = f"{resource} não encontrado(a)"
        if resource_id:
            message = f"{resource} '{resource_id}' não encontrado(a)"
        super().__init__(message, code="NOT_FOUND")


class ValidationError(AccentForgeException):
    """Exceção lançada quando dados de entrada ou configuração são inválidos."""

    def __init__(self, message: str, field: str = None):
        self.field = field
        if field:
            message = f"Campo '{field}': {message}"
        super().__init__(message, code="VALIDATION_ERROR")


class ConflictError(AccentForgeException):
    """Exceção lançada quando há conflito de identificadores (ex: utt_id duplicado)."""

    def __init__(self, message: str, resource_id: str = None):
        self.resource_id = resource_id
        super().__init__(message, code="CONFLICT")


class BusinessRuleError(AccentForgeException):
    """Exceção lançada quando uma regra do domínio é violada (ex: manifesto com uma só classe)."""

    def __init__(self, message: str):
        super().__init__(message, code="BUSINESS_RULE_VIOLATION")


class ManifestParseError(AccentForgeException):
    """Linha de manifesto que não pode ser interpretada como registro."""

    def __init__(self, path: str, line_number: int, reason: str):
        self.path = path
        self.line_number = line_number
        message = f"{path}:{line_number}: {reason}"
        super().__init__(message, code="MANIFEST_PARSE_ERROR")


class SynthesisError(AccentForgeException):
    """Exceção base para falhas de síntese (TTS ou conversão de voz)."""

    def __init__(self, message: str, code: str = "SYNTHESIS_ERROR"):
        super().__init__(message, code=code)


class TextTooLongError(SynthesisError):
    def __init__(self, length: int, limit: int):
        self.length = length
        self.limit = limit
        super().__init__(
            f"Texto com {length} caracteres excede o limite de {limit} do backend",
            code="TEXT_TOO_LONG",
        )


class EngineUnknownError(SynthesisError):
    def __init__(self, engine_id: str):
        self.engine_id = engine_id
        super().__init__(f"Engine '{engine_id}' não suportada pelo backend", code="ENGINE_UNKNOWN")


class TransportError(SynthesisError):
    """Falha de comunicação com o backend remoto (após as tentativas configuradas)."""

    def __init__(self, message: str):
        super().__init__(message, code="TRANSPORT_ERROR")


class BackendUnreachableError(SynthesisError):
    """Nenhuma requisição da expansão chegou ao backend."""

    def __init__(self, message: str):
        super().__init__(message, code="BACKEND_UNREACHABLE")


class AudioDecodeError(AccentForgeException):
    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"Não foi possível decodificar '{path}': {reason}", code="AUDIO_DECODE_ERROR")


class ShapeMismatchError(AccentForgeException):
    def __init__(self, expected: str, actual: str):
        super().__init__(f"Formato esperado {expected}, recebido {actual}", code="SHAPE_MISMATCH")


class TrainingDivergedError(AccentForgeException):
    def __init__(self, epoch: int, step: int):
        self.epoch = epoch
        self.step = step
        super().__init__(
            f"Loss não finita na época {epoch}, passo {step}; treino abortado",
            code="TRAINING_DIVERGED",
        )


class ScoringError(AccentForgeException):
    def __init__(self, message: str, missing: list = None):
        self.missing = missing or []
        super().__init__(message, code="SCORING_ERROR")


class ReproductionMismatchError(AccentForgeException):
    def __init__(self, mismatches: list):
        self.mismatches = mismatches
        listed = "; ".join(f"{m['entry']}: esperado {m['expected']}, obtido {m['actual']}" for m in mismatches)
        super().__init__(f"Valores derivados divergem da referência: {listed}", code="REPRODUCTION_MISMATCH")


class StorageError(AccentForgeException):
    """Falha de leitura/escrita em disco."""

    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"Falha de E/S em '{path}': {reason}", code="IO_ERROR")
