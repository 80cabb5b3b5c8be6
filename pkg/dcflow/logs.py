"""Logging module.

Records go to stderr; stdout carries the JSON emitted by the command line.
Solver iterations log at DEBUG, condition outcomes and trial batches at INFO.
"""

from logging.config import dictConfig
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field

HandlerType = Literal["stderr", "file"]
LoggingLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR"]

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


class StreamHandlerDict(BaseModel):
    class_: str = Field(alias="class", default="logging.StreamHandler")
    stream: str = "ext://sys.stderr"
    formatter: str = "plain"


class FileHandlerDict(BaseModel):
    class_: str = Field(alias="class", default="logging.FileHandler")
    filename: str
    mode: Literal["a", "w"] = "a"
    formatter: str = "plain"


class LoggerDict(BaseModel):
    handlers: list[HandlerType] = ["stderr"]
    level: LoggingLevel = "INFO"
    propagate: bool = False


class LoggingConfigDict(BaseModel):
    version: int = 1
    disable_existing_loggers: bool = False
    formatters: dict[str, dict] = {"plain": {"format": LOG_FORMAT}}
    handlers: dict[str, StreamHandlerDict | FileHandlerDict] = {
        "stderr": StreamHandlerDict()
    }
    loggers: dict[str, LoggerDict] = {"dcflow": LoggerDict()}


def setup_logging(
    logger_name: str | None = None,
    level: LoggingLevel = "INFO",
    log_file: Path | str | None = None,
):
    """Setup logging configuration.

    :param logger_name: An additional logger to configure, e.g. a script's own.
    :param level: The logging level.
    :param log_file: Also append the records to this file.
    """
    handlers: dict[str, StreamHandlerDict | FileHandlerDict] = {
        "stderr": StreamHandlerDict()
    }
    names: list[HandlerType] = ["stderr"]
    if log_file is not None:
        handlers["file"] = FileHandlerDict(filename=str(log_file))
        names.append("file")

    loggers = {"dcflow": LoggerDict(handlers=names, level=level)}
    if logger_name is not None:
        loggers[logger_name] = LoggerDict(handlers=names, level=level)

    dict_config = LoggingConfigDict(handlers=handlers, loggers=loggers).model_dump(
        by_alias=True
    )
    dictConfig(dict_config)
