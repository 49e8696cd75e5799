"""Exception hierarchy shared by every layer of the package."""

from __future__ import annotations


class TMError(Exception):
    """Base class; ``code`` is a stable machine-readable name."""

    code = "TMError"

    def __init__(self, message: str = "") -> None:
        super().__init__(message or self.code)
        self.message = message or self.code


class ModelError(TMError):
    code = "ModelError"


class UnknownParent(ModelError):
    code = "UnknownParent"


class UnknownThimac(ModelError):
    code = "UnknownThimac"


class UnknownStage(ModelError):
    code = "UnknownStage"


class DuplicateName(ModelError):
    code = "DuplicateName"


class InvalidName(ModelError):
    code = "InvalidName"


class DuplicateStageKind(ModelError):
    code = "DuplicateStageKind"


class DuplicateEdge(ModelError):
    code = "DuplicateEdge"


class IllegalFlow(ModelError):
    code = "IllegalFlow"


class SameThimacTrigger(ModelError):
    code = "SameThimacTrigger"


class SerializationError(TMError):
    code = "SerializationError"


class SchemaVersionMismatch(SerializationError):
    code = "SchemaVersionMismatch"


class BehaviorError(TMError):
    code = "BehaviorError"


class EmptyRegion(BehaviorError):
    code = "EmptyRegion"


class DuplicateEvent(BehaviorError):
    code = "DuplicateEvent"


class UnknownEndpoint(BehaviorError):
    code = "UnknownEndpoint"


class UnreachableEvent(BehaviorError):
    code = "UnreachableEvent"


class RegionForeign(BehaviorError):
    code = "RegionForeign"


class SimulationError(TMError):
    code = "SimulationError"


class InvalidModel(SimulationError):
    code = "InvalidModel"


class NotACreateStage(SimulationError):
    code = "NotACreateStage"


class InvalidAmount(TMError, ValueError):
    code = "InvalidAmount"


class NegativeAmount(InvalidAmount):
    code = "NegativeAmount"


class ReconfigError(TMError):
    code = "ReconfigError"


class DuplicateConfig(ReconfigError):
    code = "DuplicateConfig"


class UnknownConfig(ReconfigError):
    code = "UnknownConfig"


class BpmnError(TMError):
    code = "BpmnError"


class MalformedXml(BpmnError):
    code = "MalformedXml"


class MissingStartEvent(BpmnError):
    code = "MissingStartEvent"


class DegenerateGateway(BpmnError):
    code = "DegenerateGateway"


class ZenoError(TMError):
    code = "ZenoError"


class EmptyLattice(ZenoError):
    code = "EmptyLattice"


class AlreadySettled(ZenoError):
    code = "AlreadySettled"
