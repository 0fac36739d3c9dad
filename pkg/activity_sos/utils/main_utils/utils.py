import json
import os
import sys
from typing import Any

import dill
import yaml

from activity_sos.exception.exception import ActivitySemanticsException
from activity_sos.logging.logger import logging


def read_yaml_file(file_path: str) -> dict:
    """
    Reads a YAML file and returns its content as a Python dictionary.

    Args:
        file_path (str): Path to the YAML file to read.

    Returns:
        dict: Parsed content of the YAML file.

    Raises:
        ActivitySemanticsException: If reading or parsing the file fails.
    """
    try:
        with open(file_path, "rb") as yaml_file:
            return yaml.safe_load(yaml_file)
    except Exception as e:
        raise ActivitySemanticsException(e, sys)


def read_text_file(file_path: str) -> str:
    try:
        with open(file_path, "r", encoding="utf-8") as file:
            return file.read()
    except Exception as e:
        raise ActivitySemanticsException(e, sys)


def write_yaml_file(file_path: str, content: object, replace: bool = False) -> None:
    """
    Writes Python object content into a YAML file.

    Args:
        file_path (str): Path where the YAML file should be written.
        content (object): Python object to serialize into YAML.
        replace (bool): If True and file exists, removes it before writing.
    """
    try:
        if replace and os.path.exists(file_path):
            os.remove(file_path)
        _ensure_parent(file_path)
        with open(file_path, "w", encoding="utf-8") as file:
            yaml.safe_dump(content, file, sort_keys=False)
    except Exception as e:
        raise ActivitySemanticsException(e, sys)


def write_text_file(file_path: str, content: str) -> None:
    """Writes text as UTF-8 bytes so emitted structures are byte-stable across platforms."""
    try:
        _ensure_parent(file_path)
        with open(file_path, "wb") as file:
            file.write(content.encode("utf-8"))
    except Exception as e:
        raise ActivitySemanticsException(e, sys)


def dump_json(content: Any) -> str:
    return json.dumps(content, indent=2, sort_keys=False, ensure_ascii=False) + "\n"


def save_object(file_path: str, obj: object) -> None:
    try:
        logging.info("Entered the save_object method of main_utils")
        _ensure_parent(file_path)
        with open(file_path, "wb") as file_obj:
            dill.dump(obj, file_obj)
        logging.info("Exited the save_object method of main_utils")
    except Exception as e:
        raise ActivitySemanticsException(e, sys) from e


def load_object(file_path: str) -> object:
    try:
        if not os.path.exists(file_path):
            raise FileNotFoundError(f"The file: {file_path} does not exist")
        with open(file_path, "rb") as file_obj:
            return dill.load(file_obj)
    except Exception as e:
        raise ActivitySemanticsException(e, sys) from e


def _ensure_parent(file_path: str) -> None:
    parent = os.path.dirname(file_path)
    if parent:
        os.makedirs(parent, exist_ok=True)
