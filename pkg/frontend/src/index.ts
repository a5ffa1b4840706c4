export * from "./types";
export * from "./api";
export * from "./events";
export * from "./store";
export * from "./canvas";
export * from "./annotations";
export * from "./suggestions";
export * from "./timeline";
export * from "./video_panel";
export * from "./validation";
export * from "./dom";
