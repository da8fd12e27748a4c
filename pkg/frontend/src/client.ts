/**
 * Socket wrapper: connect, parse frames into the store, coalesce outgoing
 * commands to one per broadcast interval, surface connection status.
 */

import {
  ProtocolMismatch,
  encodeCommand,
  encodeControl,
  parseServerMessage,
} from './protocol.js';
import type { HelloMessage, SessionRecordMessage } from './protocol.js';
import { ViewState } from './view_state.js';

export interface ClientHooks {
  onHello?: (hello: HelloMessage) => void;
  onState?: () => void;
  onRecord?: (record: SessionRecordMessage) => void;
  onStatusChange?: (status: string, detail: string) => void;
}

export class TeleopClient {
  private ws: WebSocket | null = null;
  private sendTimer: number | null = null;
  private broadcastMs = 50;

  constructor(
    readonly view: ViewState,
    private readonly hooks: ClientHooks = {},
  ) {}

  connect(url: string): void {
    this.disconnect();
    this.setStatus('connecting', url);
    let ws: WebSocket;
    try {
      ws = new WebSocket(url);
    } catch (err) {
      this.setStatus('disconnected', `bad address: ${String(err)}`);
      return;
    }
    this.ws = ws;
    ws.onopen = () => this.setStatus('connected', url);
    ws.onclose = (ev) => {
      if (this.view.status !== 'incompatible') {
        this.setStatus('disconnected', ev.reason || `closed (${ev.code})`);
      }
      this.stopSendLoop();
    };
    ws.onerror = () => {
      this.setStatus('disconnected', 'connection failed');
    };
    ws.onmessage = (ev) => this.handleFrame(String(ev.data));
  }

  disconnect(): void {
    this.stopSendLoop();
    if (this.ws !== null) {
      this.ws.onclose = null;
      this.ws.close();
      this.ws = null;
    }
    this.setStatus('disconnected', '');
  }

  requestExport(): void {
    this.ws?.send(encodeControl({ export: true }));
  }

  sendControl(fields: Record<string, unknown>): void {
    this.ws?.send(encodeControl(fields));
  }

  private handleFrame(raw: string): void {
    let msg;
    try {
      msg = parseServerMessage(raw);
    } catch (err) {
      if (err instanceof ProtocolMismatch) {
        this.view.status = 'incompatible';
        this.view.statusDetail = err.message;
        this.hooks.onStatusChange?.('incompatible', err.message);
        this.disconnectKeepStatus();
        return;
      }
      this.view.statusDetail = String(err);
      return;
    }
    if (msg.type === 'hello') {
      this.broadcastMs = 1000 / msg.broadcast_hz;
      this.view.clearTrajectory();
      this.startSendLoop();
      this.hooks.onHello?.(msg);
    } else if (msg.type === 'state') {
      this.view.applyBroadcast(msg);
      this.hooks.onState?.();
    } else if (msg.type === 'session_record') {
      this.hooks.onRecord?.(msg);
    } else if (msg.type === 'error') {
      this.view.statusDetail = `server: ${msg.message}`;
    }
  }

  /** One coalesced command per broadcast interval; quiescent = no traffic. */
  private startSendLoop(): void {
    this.stopSendLoop();
    this.sendTimer = setInterval(() => {
      if (this.ws === null || this.ws.readyState !== WebSocket.OPEN) {
        return;
      }
      const cmd = this.view.commandToSend();
      if (cmd !== null) {
        this.ws.send(encodeCommand(cmd));
      }
    }, this.broadcastMs) as unknown as number;
  }

  private stopSendLoop(): void {
    if (this.sendTimer !== null) {
      clearInterval(this.sendTimer);
      this.sendTimer = null;
    }
  }

  private disconnectKeepStatus(): void {
    this.stopSendLoop();
    if (this.ws !== null) {
      this.ws.onclose = null;
      this.ws.close();
      this.ws = null;
    }
  }

  private setStatus(status: ViewState['status'], detail: string): void {
    this.view.status = status;
    this.view.statusDetail = detail;
    this.hooks.onStatusChange?.(status, detail);
  }
}
