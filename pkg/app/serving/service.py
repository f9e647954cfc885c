import logging
from typing import List, Optional, Tuple

from app.agent.inference import LoopAgent, load_agent
from app.config import CHECKPOINT_PATH, LOGGER_NAME
from app.errors import MissingModelError, SchemaError
from app.loop_ir.nests import load_program, select_nests
from app.rewriter.pragma import PragmaDirective, inject_many
from app.serving.views import NestInfo, NestPrediction

logger = logging.getLogger(LOGGER_NAME)


class PredictionService:
    def __init__(self, checkpoint_path: str = CHECKPOINT_PATH):
        """Load the checkpoint if one is configured; the service stays unready otherwise"""
        self.checkpoint_path = checkpoint_path
        self.agent: Optional[LoopAgent] = self._load_agent()

    def _load_agent(self) -> Optional[LoopAgent]:
        if not self.checkpoint_path:
            logger.warning("LOOPVEC_CHECKPOINT is not set; predictions are unavailable")
            return None
        try:
            agent = load_agent(self.checkpoint_path)
            logger.info("Loaded agent from %s", self.checkpoint_path)
            return agent
        except SchemaError as e:
            logger.error("Error loading checkpoint %s: %s", self.checkpoint_path, e.detail, exc_info=True)
            return None

    def is_ready(self) -> bool:
        return self.agent is not None

    def extract(self, source: str, file: str) -> List[NestInfo]:
        _, nests = load_program(source, file=file)
        return [NestInfo(**nest.summary()) for nest in nests]

    def predict(self, source: str, file: str, rewrite: bool = False) -> Tuple[List[NestPrediction], Optional[str]]:
        """Greedy (VF, IF) for every nest, plus the rewritten source when asked"""
        if self.agent is None:
            raise MissingModelError(detail="No checkpoint loaded")
        _, nests = load_program(source, file=file)
        chosen = [(nest, self.agent.greedy(nest)) for nest in nests]
        predictions = [
            NestPrediction(nest_id=nest.nest_id, line=nest.line, vf=action.vf, if_=action.if_)
            for nest, action in chosen
        ]
        rewritten = None
        if rewrite:
            rewritten = inject_many(source, [(nest, PragmaDirective(a.vf, a.if_)) for nest, a in chosen])
        return predictions, rewritten

    def inject(self, source: str, file: str, vf: int, if_: int, nest: Optional[str] = None) -> Tuple[str, List[str]]:
        _, nests = load_program(source, file=file)
        selected = [nests[index] for index in select_nests(nests, nest)]
        directive = PragmaDirective(vf, if_)
        return inject_many(source, [(n, directive) for n in selected]), [n.nest_id for n in selected]
