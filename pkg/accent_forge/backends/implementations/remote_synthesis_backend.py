import io
import json
import logging
import os
import threading
import time
import urllib.error
import urllib.request
from typing import Dict, Iterable, Optional

import numpy as np
import soundfile as sf

from accent_forge.api.exceptions import EngineUnknownError, SynthesisError, TransportError, ValidationError
from accent_forge.backends.interfaces.synthesis_backend import BackendCapabilities, SynthesisBackend
from accent_forge.business_model.audio import Waveform
from accent_forge.business_model.tts_engine import TTSEngineSpec

logger = logging.getLogger(__name__)

ENDPOINT_ENV = "ACCENT_FORGE_TTS_ENDPOINT"
API_KEY_ENV = "ACCENT_FORGE_TTS_API_KEY"


class RemoteSynthesisBackend(SynthesisBackend):
    """
    Adaptador HTTP para um serviço de TTS.

    Envia POST JSON {engine_id, language_code, accent_tag, text} e espera um WAV
    no corpo da resposta. Falhas de transporte e respostas 5xx são repetidas com
    backoff exponencial; a taxa de requisições é limitada por processo.
    """

    name = "remote"

    def __init__(
        self,
        endpoint: str,
        engines: Iterable[TTSEngineSpec],
        api_key: Optional[str] = None,
        max_retries: int = 3,
        backoff_sec: float = 0.5,
        rate_limit_rps: Optional[float] = 2.0,
        timeout_sec: float = 30.0,
        max_text_length: int = 5000,
    ):
        self.endpoint = endpoint
        self.api_key = api_key
        self.engines: Dict[str, TTSEngineSpec] = {e.engine_id: e for e in engines}
        self.max_retries = max_retries
        self.backoff_sec = backoff_sec
        self.rate_limit_rps = rate_limit_rps
        self.timeout_sec = timeout_sec
        self.max_text_length = max_text_length
        self._lock = threading.Lock()
        self._last_request = 0.0

    @classmethod
    def from_env(cls, engines: Iterable[TTSEngineSpec], **kwargs) -> "RemoteSynthesisBackend":
        """
        Raises:
            ValidationError: Se ACCENT_FORGE_TTS_ENDPOINT não estiver definido
        """
        endpoint = os.environ.get(ENDPOINT_ENV)
        if not endpoint:
            raise ValidationError(f"defina {ENDPOINT_ENV} para usar o backend remoto", ENDPOINT_ENV)
        return cls(endpoint, engines, api_key=os.environ.get(API_KEY_ENV), **kwargs)

    @property
    def capabilities(self) -> BackendCapabilities:
        return BackendCapabilities(frozenset(self.engines), self.max_text_length, self.rate_limit_rps)

    def _throttle(self) -> None:
        if not self.rate_limit_rps:
            return
        with self._lock:
            wait = self._last_request + 1.0 / self.rate_limit_rps - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last_request = time.monotonic()

    def _request(self, engine: TTSEngineSpec, text: str) -> urllib.request.Request:
        body = json.dumps({
            "engine_id": engine.engine_id,
            "language_code": engine.language_code,
            "accent_tag": engine.accent_tag,
            "text": text,
        }).encode("utf-8")
        headers = {"Content-Type": "application/json", "Accept": "audio/wav"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return urllib.request.Request(self.endpoint, data=body, headers=headers, method="POST")

    def synthesize(self, engine_id: str, text: str) -> Waveform:
        self.check_request(engine_id, text)
        engine = self.engines.get(engine_id)
        if engine is None:
            raise EngineUnknownError(engine_id)

        last_error = ""
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_sec * 2 ** (attempt - 1))
            self._throttle()
            try:
                with urllib.request.urlopen(self._request(engine, text), timeout=self.timeout_sec) as response:
                    return self._decode(response.read(), engine)
            except urllib.error.HTTPError as e:
                if e.code < 500:
                    raise SynthesisError(f"engine '{engine_id}' recusou a requisição: HTTP {e.code}", "HTTP_ERROR") from e
                last_error = f"HTTP {e.code}"
            except (urllib.error.URLError, TimeoutError, ConnectionError) as e:
                last_error = str(getattr(e, "reason", e))
            logger.warning("synthesis retry engine=%s attempt=%d error=%s", engine_id, attempt + 1, last_error)
        raise TransportError(f"{self.endpoint}: {last_error} após {self.max_retries + 1} tentativas")

    @staticmethod
    def _decode(payload: bytes, engine: TTSEngineSpec) -> Waveform:
        try:
            data, rate = sf.read(io.BytesIO(payload), dtype="float32", always_2d=True)
        except RuntimeError as e:
            raise SynthesisError(f"resposta da engine '{engine.engine_id}' não é áudio válido: {e}") from e
        if data.size == 0:
            raise SynthesisError(f"engine '{engine.engine_id}' devolveu áudio vazio")
        samples = data.mean(axis=1)
        peak = float(np.max(np.abs(samples)))
        if peak > 1.0:
            samples = samples / peak
        return Waveform(samples, rate)
