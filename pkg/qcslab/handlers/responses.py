"""
Response helpers shared by the CLI handlers.

Handlers never raise; they return {'status': exit code, 'body': JSON-ready dict}.
Invalid input maps to status 2, every other library failure to status 1.
"""

import logging
from typing import Any, Dict

from qcslab.errors import InvalidArgumentError, QcslabError
from qcslab.utils.numeric import to_jsonable

logger = logging.getLogger(__name__)

STATUS_OK = 0
STATUS_FAILED = 1
STATUS_INVALID = 2


def ok(body: Dict[str, Any]) -> Dict[str, Any]:
    return {'status': STATUS_OK, 'body': to_jsonable(body)}


def error_response(e: Exception, tag: str) -> Dict[str, Any]:
    """
    Log an exception once and turn it into an error response.

    Args:
        e: The caught exception
        tag: Log tag of the calling handler

    Returns:
        Response with status 2 for invalid input, 1 otherwise
    """
    status = STATUS_INVALID if isinstance(e, InvalidArgumentError) else STATUS_FAILED
    if isinstance(e, QcslabError):
        logger.error(f"[{tag}] {type(e).__name__}: {e}")
    else:
        logger.error(f"[{tag}] unexpected error: {e}", exc_info=True)
    body: Dict[str, Any] = {'error': type(e).__name__, 'message': str(e)}
    residual = getattr(e, 'residual', None)
    if residual is not None:
        body['residual'] = residual
    return {'status': status, 'body': to_jsonable(body)}
