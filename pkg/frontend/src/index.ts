export { formatFixed6, pythonFloatRepr } from "./format";
export {
  Encodable,
  Float,
  LENGTH_BYTES,
  MAX_MESSAGE_BYTES,
  MAX_PAYLOAD_BYTES,
  MessageDecodeError,
  ProtocolError,
  decodeMessage,
  encodeMessage,
  flt,
} from "./protocol";
export {
  CLASS_INDEX,
  CLASS_NAMES,
  FrameAnnotation,
  labelFileText,
  labelLine,
  labelLines,
} from "./labels";
export {
  AnnotationRecord,
  CommandError,
  FrameEvent,
  FrameMeta,
  FramePose,
  ScenarioClient,
  ScenarioSource,
} from "./client";
