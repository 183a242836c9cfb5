/** Microphone capture for voice commands.
 *
 * Records with MediaRecorder and hands the clip to the caller as base64,
 * ready to post to the gateway's /input endpoint. The gateway answers 501
 * when no transcription backend is configured; callers should surface
 * that instead of treating it as a crash.
 */

export class AudioRecorder {
  private recorder: MediaRecorder | null = null;
  private chunks: Blob[] = [];

  get recording(): boolean {
    return this.recorder !== null && this.recorder.state === "recording";
  }

  async start(): Promise<void> {
    if (this.recording) {
      return;
    }
    const stream = await navigator.mediaDevices.getUserMedia({ audio: true });
    this.chunks = [];
    this.recorder = new MediaRecorder(stream);
    this.recorder.ondataavailable = (event) => {
      if (event.data.size > 0) {
        this.chunks.push(event.data);
      }
    };
    this.recorder.start();
  }

  /** Stop recording and return the captured clip as base64. */
  async stop(): Promise<string> {
    const recorder = this.recorder;
    if (recorder === null) {
      throw new Error("not recording");
    }
    const stopped = new Promise<void>((resolve) => {
      recorder.onstop = () => resolve();
    });
    recorder.stop();
    recorder.stream.getTracks().forEach((track) => track.stop());
    await stopped;
    this.recorder = null;
    const blob = new Blob(this.chunks, { type: recorder.mimeType || "audio/webm" });
    return blobToBase64(blob);
  }
}

export function blobToBase64(blob: Blob): Promise<string> {
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onerror = () => reject(reader.error);
    reader.onload = () => {
      // result looks like "data:audio/webm;base64,...."
      const url = reader.result as string;
      resolve(url.slice(url.indexOf(",") + 1));
    };
    reader.readAsDataURL(blob);
  });
}
