/** Thin WebSocket wrapper; all message handling lives in the pure modules. */

import type { ClientMsg } from "./protocol.js";
import { encodeClientMessage } from "./protocol.js";

export interface ClientHandlers {
  onOpen?: () => void;
  onMessage: (text: string) => void;
  onClose?: () => void;
}

export interface Connection {
  send(msg: ClientMsg): void;
  close(): void;
  readonly open: boolean;
}

export function connect(url: string, handlers: ClientHandlers): Connection {
  const ws = new WebSocket(url);
  ws.onopen = () => handlers.onOpen?.();
  ws.onmessage = (ev) => handlers.onMessage(String(ev.data));
  ws.onclose = () => handlers.onClose?.();
  ws.onerror = () => handlers.onClose?.();
  return {
    send(msg: ClientMsg) {
      if (ws.readyState === WebSocket.OPEN) {
        ws.send(encodeClientMessage(msg));
      }
      // buffered sends while disconnected are dropped by design
    },
    close() {
      ws.close();
    },
    get open() {
      return ws.readyState === WebSocket.OPEN;
    },
  };
}
