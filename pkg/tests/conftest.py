import pytest

from accent_forge.api.dto import FrontendConfig, ModelConfig
from accent_forge.business_model.manifest import Manifest
from accent_forge.repositories.implementations.jsonl_manifest_repository import JsonlManifestRepository
from accent_forge.services.manifest_service import ManifestService

from helpers import make_record, tone, write_wav


@pytest.fixture
def manifest_repository():
    return JsonlManifestRepository()


@pytest.fixture
def manifest_service(manifest_repository):
    return ManifestService(manifest_repository)


@pytest.fixture
def small_frontend():
    return FrontendConfig(sample_rate=8000, window=256, hop=128, n_bins=16, duration_sec=0.5)


@pytest.fixture
def toy_model_config():
    return ModelConfig(variant="se_res2net", width=[8, 16], depth=[1, 1], res2net_scale=4, se_reduction=4, input_bins=16)


@pytest.fixture
def audio_manifest(tmp_path):
    """
    Cria WAVs reais em tmp_path e devolve um manifesto com raiz nesse diretório.
    Bona fide são tons graves, spoof tons agudos.
    """

    def build(languages=("en",), per_class=4, sample_rate=8000, seconds=0.6, speakers=None):
        records = []
        for language in languages:
            for label, base in (("bona_fide", 300.0), ("spoof", 2200.0)):
                for i in range(per_class):
                    utt_id = f"{language}-{label}-{i:03d}"
                    samples = tone(base + 37.0 * i, sample_rate, seconds, 0.4, phase=0.3 * i)
                    write_wav(tmp_path / "audio" / f"{utt_id}.wav", samples, sample_rate)
                    speaker = None if speakers is None else f"{language}-spk{i % speakers}"
                    records.append(make_record(utt_id, label, language, "test", speaker_id=speaker))
        return Manifest(records, "audio", str(tmp_path))

    return build
