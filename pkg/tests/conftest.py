import pytest

from interasr.agents import TemplateSet
from interasr.gateway import BackendBinding, ModelGateway, ScenarioScript


@pytest.fixture
def templates():
    return TemplateSet.load()


def make_gateway(llm_script=None, asr_script=None, tts_script=None, **kwargs):
    """Scripted gateway over all three roles."""
    bindings = {
        "asr": BackendBinding(role="asr", provider="scripted",
                              script=asr_script or ScenarioScript()),
        "llm": BackendBinding(role="llm", provider="scripted",
                              script=llm_script or ScenarioScript()),
        "tts": BackendBinding(role="tts", provider="scripted",
                              script=tts_script or ScenarioScript()),
    }
    return ModelGateway(bindings, **kwargs)


@pytest.fixture
def gateway_factory():
    return make_gateway


def k_correction_scenario(uid, k, llm_script, asr_script):
    """Script one utterance that needs exactly k correction rounds.

    Reference is k+1 tokens r0..rk; the initial hypothesis has the first k
    tokens wrong (w0..w{k-1}); round i fixes token i-1. After round k the
    transcript equals the reference and the judge short-circuit passes it.
    Returns the manifest entry fields (id, reference_text).
    """
    n = k + 1
    reference = " ".join(f"r{i}" for i in range(n))

    def transcript(t):
        return " ".join(f"r{i}" if (i < t or i >= k) else f"w{i}" for i in range(n))

    asr_script.add("asr", (uid, 0), transcript(0))
    for t in range(k):
        llm_script.add("llm", (uid, t, "judge"), "VERDICT: DIFFERENT")
        llm_script.add("llm", (uid, t + 1, "user"), f"word {t + 1} should be r{t}")
        llm_script.add("llm", (uid, t + 1, "refine"),
                       f"```FINAL\n{transcript(t + 1)}\n```")
    return reference


def never_converging_scenario(uid, max_loops, llm_script, asr_script):
    """Script an utterance whose corrector never fixes the error."""
    asr_script.add("asr", (uid, 0), "see the night")
    for t in range(max_loops + 1):
        llm_script.add("llm", (uid, t, "judge"), "VERDICT: DIFFERENT")
        llm_script.add("llm", (uid, t + 1, "user"), "no, knight")
        llm_script.add("llm", (uid, t + 1, "refine"), "```FINAL\nsee the night\n```")
    return "see the knight"
